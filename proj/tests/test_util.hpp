#ifndef RWMLAB_TEST_UTIL_HPP
#define RWMLAB_TEST_UTIL_HPP

// Shared fixtures and independent oracles. Everything here is deliberately
// naive (brute force, long double, small steps) so it checks the library
// implementations without sharing code paths with them.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "rwmlab/matrix.hpp"
#include "rwmlab/mmpp.hpp"
#include "rwmlab/rng.hpp"

namespace testutil {

// Truncated power series for exp(A t), accumulated in long double.
inline std::vector<long double> series_mat_exp(const rwmlab::SquareMatrix& a, double t,
                                               int order = 30) {
  const int n = a.dim();
  std::vector<long double> at(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) at[i * n + j] = static_cast<long double>(a(i, j)) * t;

  std::vector<long double> sum(n * n, 0.0L), term(n * n, 0.0L);
  for (int i = 0; i < n; ++i) term[i * n + i] = 1.0L;
  sum = term;
  for (int k = 1; k <= order; ++k) {
    std::vector<long double> next(n * n, 0.0L);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j) next[i * n + j] += term[i * n + l] * at[l * n + j];
    for (auto& x : next) x /= k;
    term = next;
    for (int i = 0; i < n * n; ++i) sum[i] += term[i];
  }
  return sum;
}

// Time-discretized hidden-state filter for the modulated Poisson
// likelihood: per step of width dt, transition by I + Q dt, survive with
// e^{-psi dt}, and pick up an intensity factor at event steps.
inline double discretized_filter_loglik(const rwmlab::MmppParams& p,
                                        const rwmlab::EventData& data, double dt) {
  const int d = p.d;
  const rwmlab::ProbVector nu = rwmlab::stationary_dist(p.q);
  std::vector<long double> v(nu.begin(), nu.end());
  long double log_acc = 0.0L;
  const long steps = std::llround(data.t_obs / dt);
  std::size_t next_event = 0;
  std::vector<long double> w(d);
  for (long s = 0; s < steps; ++s) {
    const double step_end = static_cast<double>(s + 1) * dt;
    std::fill(w.begin(), w.end(), 0.0L);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const long double trans = (i == j ? 1.0L : 0.0L) + static_cast<long double>(p.q(i, j)) * dt;
        w[j] += v[i] * trans;
      }
    }
    for (int j = 0; j < d; ++j) w[j] *= std::exp(-static_cast<long double>(p.psi[j]) * dt);
    while (next_event < data.count() && data.events[next_event] <= step_end + 1e-12) {
      for (int j = 0; j < d; ++j) w[j] *= p.psi[j];
      ++next_event;
    }
    long double total = 0.0L;
    for (int j = 0; j < d; ++j) total += w[j];
    log_acc += std::log(static_cast<double>(total));
    for (int j = 0; j < d; ++j) v[j] = w[j] / total;
  }
  return static_cast<double>(log_acc);
}

// Stationary AR(1) with unit marginal variance.
inline std::vector<double> ar1_series(double rho, std::size_t n, std::uint64_t seed) {
  rwmlab::Rng rng(seed);
  std::vector<double> x(n);
  x[0] = rng.normal();
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 1; i < n; ++i) x[i] = rho * x[i - 1] + innovation * rng.normal();
  return x;
}

inline double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance_of(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Determinant by cofactor expansion; fine for the 4x4 Jacobian checks.
inline double det_small(const std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  double det = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<double>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (std::size_t cc = 0; cc < n; ++cc) {
        if (cc != c) row.push_back(m[r][cc]);
      }
      minor.push_back(std::move(row));
    }
    det += (c % 2 == 0 ? 1.0 : -1.0) * m[0][c] * det_small(minor);
  }
  return det;
}

// Central-difference Jacobian determinant of the reparameterization inverse.
inline double numeric_reparam_jacobian(const rwmlab::ReparamPoint& p) {
  const double base[4] = {p.psi_bar, p.q, p.alpha, p.beta};
  std::vector<std::vector<double>> jac(4, std::vector<double>(4));
  for (int c = 0; c < 4; ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(base[c]));
    double lo[4], hi[4];
    std::copy(base, base + 4, lo);
    std::copy(base, base + 4, hi);
    lo[c] -= h;
    hi[c] += h;
    const auto f_lo = rwmlab::from_reparam({lo[0], lo[1], lo[2], lo[3]});
    const auto f_hi = rwmlab::from_reparam({hi[0], hi[1], hi[2], hi[3]});
    for (int r = 0; r < 4; ++r) jac[r][c] = ((*f_hi)[r] - (*f_lo)[r]) / (2.0 * h);
  }
  return det_small(jac);
}

}  // namespace testutil

#endif  // RWMLAB_TEST_UTIL_HPP
