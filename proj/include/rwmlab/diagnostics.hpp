#ifndef RWMLAB_DIAGNOSTICS_HPP
#define RWMLAB_DIAGNOSTICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwmlab/matrix.hpp"
#include "rwmlab/samplers.hpp"

namespace rwmlab {

/// Normalized autocorrelations rho_0..rho_max_lag of a scalar series
/// (rho_0 = 1). Lag covariances are centered cross-products divided by
/// n - lag. Throws std::invalid_argument unless max_lag < length, and
/// std::domain_error for a zero-variance series.
std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag);

struct ActEstimate {
  double act = 1.0;
  long truncation_lag = 0;   // first lag whose autocorrelation fell below 0.05
  bool truncated_at_half = false;  // no such lag within n/2
};

/// Windowed integrated autocorrelation time: 1 + 2 * sum of rho_i up to (not
/// including) the first lag where rho drops below 0.05. If no lag within n/2
/// qualifies, the sum is truncated there and flagged. Requires length >= 100.
ActEstimate act_window(std::span<const double> series);

/// act * likelihood_evals_per_iteration, putting sweeps that pay several
/// target evaluations per iteration on the same cost axis as block updates.
/// Throws std::invalid_argument if the multiplier is below 1.
double cpu_adjusted_act(double act, double likelihood_evals_per_iteration);

/// Mean squared Euclidean displacement between consecutive rows.
double msejd(const SampleMatrix& samples, std::size_t row_begin, std::size_t row_end);
double msejd(const SampleMatrix& samples);

/// Shape-weighted mean squared displacement: mean of d^T Sigma^-1 d over
/// consecutive differences d. Throws unless sigma is positive definite.
double msjd(const SampleMatrix& samples, std::size_t row_begin, std::size_t row_end,
            const SquareMatrix& sigma);
double msjd(const SampleMatrix& samples, const SquareMatrix& sigma);

/// Linear-interpolation quantile of a sorted sample at level p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

struct QqRow {
  double level;
  double sample_q;
  double ref_q;
  double band_lo;
  double band_hi;
};

struct QqTable {
  std::vector<QqRow> rows;
  double sample_act = 1.0;
  std::size_t subsample_size = 0;
};

/// Quantile-quantile comparison of a chain functional against a reference
/// sample. The 95% band comes from n_resamples subsamples of the reference,
/// each of the sample's effective size (length / ACT). Throws
/// std::invalid_argument when the reference is shorter than that effective
/// size or either input has fewer than 100 points.
QqTable qq_compare(std::span<const double> sample, std::span<const double> reference,
                   int n_quantiles, int n_resamples, std::uint64_t seed);

struct ParamDiagnostics {
  std::string param;
  double act = 1.0;
  double act_cpu = 1.0;
  double ess = 0.0;
  double accept_rate = 0.0;
  long trunc_lag = 0;
  bool truncated = false;
};

struct DiagnosticsReport {
  std::vector<ParamDiagnostics> params;
  double msejd_value = 0.0;
  std::optional<double> msjd_value;
};

/// CSV with header "param,act,act_cpu,ess,accept_rate,trunc_lag".
void write_report_csv(const std::string& path, const DiagnosticsReport& report);
DiagnosticsReport read_report_csv(const std::string& path);

/// CSV with header "param,quantile,sample_q,ref_q,band_lo,band_hi".
void write_qq_csv(const std::string& path, std::span<const std::string> param_names,
                  std::span<const QqTable> tables);

}  // namespace rwmlab

#endif  // RWMLAB_DIAGNOSTICS_HPP
