#include "rwmlab/efficiency.hpp"

#include <cmath>
#include <stdexcept>

namespace rwmlab {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

EfficiencyCurvePoint diffusion_speed(double mu, double roughness) {
  if (!(mu > 0.0) || !(roughness > 0.0)) {
    throw std::invalid_argument("diffusion_speed: mu and roughness must be positive");
  }
  const double acceptance = 2.0 * normal_cdf(-0.5 * mu * std::sqrt(roughness));
  return {mu, mu * mu * acceptance, acceptance};
}

double mwg_efficiency_ratio(std::span<const double> block_mean_sq_inverse_scales) {
  if (block_mean_sq_inverse_scales.empty()) {
    throw std::invalid_argument("mwg_efficiency_ratio: empty input");
  }
  double sum = 0.0;
  double inv_sum = 0.0;
  for (double c : block_mean_sq_inverse_scales) {
    if (!(c > 0.0)) {
      throw std::invalid_argument("mwg_efficiency_ratio: inputs must be positive");
    }
    sum += c;
    inv_sum += 1.0 / c;
  }
  const double k = static_cast<double>(block_mean_sq_inverse_scales.size());
  const double arithmetic = sum / k;
  const double harmonic = k / inv_sum;
  return arithmetic / harmonic;
}

}  // namespace rwmlab
