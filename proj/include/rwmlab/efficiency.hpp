#ifndef RWMLAB_EFFICIENCY_HPP
#define RWMLAB_EFFICIENCY_HPP

#include <span>

namespace rwmlab {

/// One point on the random-walk scaling curve: rescaled proposal scale mu,
/// limiting diffusion speed, and the matching expected acceptance rate.
struct EfficiencyCurvePoint {
  double mu;
  double speed;
  double acceptance;
};

/// Standard Gaussian CDF.
double normal_cdf(double x);

/// Limiting efficiency of a random walk with rescaled scale mu on a target
/// with roughness j: acceptance = 2*Phi(-mu*sqrt(j)/2), speed =
/// mu^2 * acceptance. The leading constant of the diffusion speed is
/// normalized to one. Throws std::invalid_argument unless mu > 0 and j > 0.
EfficiencyCurvePoint diffusion_speed(double mu, double roughness);

/// Ratio of arithmetic to harmonic mean of per-block mean squared inverse
/// scales: the limiting efficiency of a within-Gibbs sweep relative to block
/// updates. Always >= 1, with equality iff all blocks match.
double mwg_efficiency_ratio(std::span<const double> block_mean_sq_inverse_scales);

}  // namespace rwmlab

#endif  // RWMLAB_EFFICIENCY_HPP
