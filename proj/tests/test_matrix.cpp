#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rwmlab/matrix.hpp"
#include "rwmlab/rng.hpp"
#include "test_util.hpp"

using namespace rwmlab;

namespace {

SquareMatrix random_generator(int d, Rng& rng, double rate_scale = 2.0) {
  SquareMatrix q(d);
  for (int i = 0; i < d; ++i) {
    double row = 0.0;
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      q(i, j) = rate_scale * rng.uniform() + 0.05;
      row += q(i, j);
    }
    q(i, i) = -row;
  }
  return q;
}

double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b) {
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace

TEST_CASE("mat_exp of the zero matrix is the identity") {
  const SquareMatrix zero(2);
  const SquareMatrix e = mat_exp(zero, 5.0);
  CHECK(e(0, 0) == 1.0);
  CHECK(e(1, 1) == 1.0);
  CHECK(e(0, 1) == 0.0);
  CHECK(e(1, 0) == 0.0);
}

TEST_CASE("mat_exp of a diagonal matrix exponentiates the diagonal") {
  const SquareMatrix a(2, {-1.0, 0.0, 0.0, -2.0});
  const SquareMatrix e = mat_exp(a, 1.0);
  CHECK(e(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(std::abs(e(0, 1)) < 1e-15);
  CHECK(std::abs(e(1, 0)) < 1e-15);
}

TEST_CASE("mat_exp agrees with an extended-precision power series") {
  const SquareMatrix a(2, {-1.0, 1.0, 1.0, -1.0});
  const SquareMatrix e = mat_exp(a, 0.7);
  const auto oracle = testutil::series_mat_exp(a, 0.7);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(e(i, j) - static_cast<double>(oracle[i * 2 + j])) < 1e-10);
    }
  }

  // The truncated series is only trustworthy for modest ||A t||, so keep the
  // random cases inside its convergence range.
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 2 + static_cast<int>(rng.integer(3));
    const SquareMatrix q = random_generator(d, rng);
    const double t = 0.5 * rng.uniform();
    const SquareMatrix got = mat_exp(q, t);
    const auto want = testutil::series_mat_exp(q, t);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        CHECK(std::abs(got(i, j) - static_cast<double>(want[i * d + j])) < 1e-10);
      }
    }
  }
}

TEST_CASE("mat_exp semigroup property on generator-scale inputs") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 2 + static_cast<int>(rng.integer(3));
    const SquareMatrix q = random_generator(d, rng);
    const double s = 3.0 * rng.uniform();
    const double t = 3.0 * rng.uniform();
    const SquareMatrix whole = mat_exp(q, s + t);
    const SquareMatrix split = mat_exp(q, s) * mat_exp(q, t);
    CHECK(max_abs_diff(whole, split) < 1e-8);
  }
}

TEST_CASE("generator exponentials are stochastic matrices") {
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 2 + static_cast<int>(rng.integer(4));
    const SquareMatrix q = random_generator(d, rng);
    const double t = 5.0 * rng.uniform();
    const SquareMatrix e = mat_exp(q, t);
    for (int i = 0; i < d; ++i) {
      double row = 0.0;
      for (int j = 0; j < d; ++j) {
        CHECK(e(i, j) >= -1e-12);
        row += e(i, j);
      }
      CHECK(row == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("mat_exp rejects bad arguments") {
  const SquareMatrix a(2, {0.0, 1.0, 1.0, 0.0});
  CHECK_THROWS_AS(mat_exp(a, -1.0), std::invalid_argument);
  SquareMatrix b(2);
  b(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(mat_exp(b, 1.0), std::invalid_argument);
}

TEST_CASE("stationary_dist of a symmetric two-state generator is uniform") {
  const SquareMatrix q(2, {-1.0, 1.0, 1.0, -1.0});
  const ProbVector nu = stationary_dist(q);
  CHECK(nu[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(nu[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("stationary_dist is proportional to the opposing rates") {
  const SquareMatrix q(2, {-2.0, 2.0, 1.0, -1.0});
  const ProbVector nu = stationary_dist(q);
  CHECK(nu[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(nu[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("stationary_dist of the symmetric three-state generator is uniform") {
  SquareMatrix q(3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) q(i, j) = i == j ? -1.0 : 0.5;
  }
  const ProbVector nu = stationary_dist(q);
  for (double x : nu) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("stationary_dist satisfies nu Q = 0 and is exp-invariant") {
  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 2 + static_cast<int>(rng.integer(4));
    const SquareMatrix q = random_generator(d, rng);
    const ProbVector nu = stationary_dist(q);
    double total = 0.0;
    for (double x : nu) {
      CHECK(x >= 0.0);
      total += x;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const auto resid = row_times(nu, q);
    for (double r : resid) CHECK(std::abs(r) <= 1e-10);

    for (double t : {0.1, 1.0, 17.0, 100.0}) {
      const auto moved = row_times(nu, mat_exp(q, t));
      for (int i = 0; i < d; ++i) CHECK(std::abs(moved[i] - nu[i]) < 1e-8);
    }
  }
}

TEST_CASE("stationary_dist rejects non-generators and reducible chains") {
  CHECK_THROWS_AS(stationary_dist(SquareMatrix(2, {1.0, -1.0, 0.0, 0.0})),
                  std::invalid_argument);
  // Two disconnected states: no unique stationary distribution.
  CHECK_THROWS_AS(stationary_dist(SquareMatrix(2, {0.0, 0.0, 0.0, 0.0})),
                  std::invalid_argument);
  // Absorbing block reachable only one way.
  SquareMatrix q(3);
  q(0, 0) = -1.0;
  q(0, 1) = 1.0;
  // states 1 and 2 swap between themselves, state 0 drains into them
  q(1, 1) = -1.0;
  q(1, 2) = 1.0;
  q(2, 1) = 1.0;
  q(2, 2) = -1.0;
  // q is a valid generator but not irreducible; the stationary distribution
  // exists and is unique here, so this one must succeed.
  const ProbVector nu = stationary_dist(q);
  CHECK(nu[0] == doctest::Approx(0.0));
}

TEST_CASE("solve_linear and cholesky round-trip") {
  const SquareMatrix a(3, {4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0});
  const std::vector<double> x_true = {1.0, -2.0, 0.5};
  const std::vector<double> b = times_col(a, x_true);
  const std::vector<double> x = solve_linear(a, b);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-12));

  const auto l = cholesky(a);
  REQUIRE(l.has_value());
  const SquareMatrix recon = (*l) * l->transpose();
  CHECK(max_abs_diff(recon, a) < 1e-12);

  CHECK_FALSE(cholesky(SquareMatrix(2, {1.0, 2.0, 2.0, 1.0})).has_value());
  CHECK_THROWS_AS(solve_linear(SquareMatrix(2, {1.0, 1.0, 1.0, 1.0}), {1.0, 2.0}),
                  std::invalid_argument);
}
