#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rwmlab/efficiency.hpp"

using namespace rwmlab;

TEST_CASE("acceptance at the classic scaling is about 0.234") {
  const EfficiencyCurvePoint p = diffusion_speed(2.38, 1.0);
  CHECK(std::abs(p.acceptance - 0.2338) < 0.001);
  CHECK(p.speed == doctest::Approx(2.38 * 2.38 * p.acceptance));
}

TEST_CASE("small scales accept everything but move nowhere") {
  const EfficiencyCurvePoint p = diffusion_speed(1e-9, 1.0);
  CHECK(p.acceptance == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(p.speed < 1e-9);
}

TEST_CASE("the speed-optimal scale shrinks with target roughness") {
  // argmax over a mu-grid at roughness 4 should sit near 2.38/sqrt(4).
  double best_mu = 0.0, best_speed = -1.0;
  for (int i = 0; i <= 400; ++i) {
    const double mu = 0.05 * std::pow(10.0, 2.0 * i / 400.0);  // 0.05 .. 5
    const EfficiencyCurvePoint p = diffusion_speed(mu, 4.0);
    if (p.speed > best_speed) {
      best_speed = p.speed;
      best_mu = mu;
    }
  }
  CHECK(std::abs(best_mu - 1.19) < 0.05);
}

TEST_CASE("acceptance decreases in mu and speed is unimodal") {
  double prev_acc = 2.0;
  std::vector<double> speeds;
  for (int i = 0; i <= 100; ++i) {
    const double mu = 0.1 * std::pow(10.0, 2.0 * i / 100.0);
    const EfficiencyCurvePoint p = diffusion_speed(mu, 1.0);
    CHECK(p.acceptance < prev_acc);
    prev_acc = p.acceptance;
    speeds.push_back(p.speed);
  }
  int direction_changes = 0;
  for (std::size_t i = 2; i < speeds.size(); ++i) {
    const bool was_up = speeds[i - 1] > speeds[i - 2];
    const bool is_up = speeds[i] > speeds[i - 1];
    if (was_up != is_up) ++direction_changes;
  }
  CHECK(direction_changes == 1);
}

TEST_CASE("diffusion_speed validates its arguments") {
  CHECK_THROWS_AS(diffusion_speed(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(diffusion_speed(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(diffusion_speed(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("within-Gibbs efficiency ratio is arithmetic over harmonic mean") {
  const std::vector<double> equal = {4.0, 4.0, 4.0};
  CHECK(mwg_efficiency_ratio(equal) == doctest::Approx(1.0).epsilon(1e-15));

  // Hand arithmetic: mean(1,4) = 2.5, harmonic = 2/(1 + 1/4) = 1.6.
  const std::vector<double> two = {1.0, 4.0};
  CHECK(mwg_efficiency_ratio(two) == doctest::Approx(2.5 / 1.6).epsilon(1e-14));
  CHECK(mwg_efficiency_ratio(two) == doctest::Approx(1.5625).epsilon(1e-14));

  // mean(1,1,100) = 34, harmonic = 3/(1 + 1 + 0.01).
  const std::vector<double> three = {1.0, 1.0, 100.0};
  const double expected = 34.0 / (3.0 / 2.01);
  CHECK(mwg_efficiency_ratio(three) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(std::abs(mwg_efficiency_ratio(three) - 22.78) < 0.01);
}

TEST_CASE("efficiency ratio properties on random inputs") {
  std::vector<double> v = {0.3, 0.3, 0.3};
  CHECK(mwg_efficiency_ratio(v) == doctest::Approx(1.0).epsilon(1e-12));
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> blocks;
    double seedling = 0.37 * (rep + 1);
    bool all_equal = true;
    for (int k = 0; k < 2 + rep % 4; ++k) {
      seedling = std::fmod(seedling * 7.13 + 0.19, 5.0) + 0.01;
      blocks.push_back(seedling);
      if (blocks[0] != seedling) all_equal = false;
    }
    const double r = mwg_efficiency_ratio(blocks);
    CHECK(r >= 1.0 - 1e-12);
    if (!all_equal) CHECK(r > 1.0);
  }
}

TEST_CASE("efficiency ratio validates its input") {
  CHECK_THROWS_AS(mwg_efficiency_ratio({}), std::invalid_argument);
  CHECK_THROWS_AS(mwg_efficiency_ratio(std::vector<double>{1.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(mwg_efficiency_ratio(std::vector<double>{-1.0}), std::invalid_argument);
}
