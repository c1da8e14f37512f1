#ifndef RWMLAB_SAMPLERS_HPP
#define RWMLAB_SAMPLERS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwmlab/matrix.hpp"
#include "rwmlab/rng.hpp"

namespace rwmlab {

/// Unnormalized log target density. Returns -infinity outside the support;
/// samplers never accept into such states. Must be safe to call from
/// multiple chains at once.
struct TargetDensity {
  int dim = 0;
  std::function<double(std::span<const double>)> logpdf;
};

/// Coordinate change applied before the additive walk. Log restricts the
/// target support to the positive orthant; the signed-log variant
/// z = sign(x) log(1+|x|) is a bijection of the whole line that still pulls
/// heavy tails in.
enum class Transform { None, Log, SignedLog };

std::vector<double> apply_transform(Transform t, std::span<const double> x);
std::vector<double> invert_transform(Transform t, std::span<const double> z);
/// log |d invert_transform(z) / dz|, the term added to the transformed-space
/// log density.
double transform_log_jacobian(Transform t, std::span<const double> z);

enum class ProposalFamily { SphericalGaussian, ShapedGaussian, ShapedCauchy };

/// Jump proposal: overall scale, optionally oriented by a lower-triangular
/// factor L with Sigma = L L^T.
struct ProposalSpec {
  ProposalFamily family = ProposalFamily::SphericalGaussian;
  double scale = 1.0;
  std::optional<SquareMatrix> shape_chol;

  void validate(int dim) const;
};

/// The chain variants exposed by the harness.
enum class Algorithm {
  Blk,         // block additive, spherical Gaussian
  MwG,         // one-parameter-at-a-time additive Gaussian
  BlkShp,      // block additive, shaped Gaussian
  BlkShpCau,   // block additive, shaped Cauchy
  BlkShpMul,   // block multiplicative (additive on logs), shaped Gaussian
  BlkAdpMul,   // block multiplicative with adaptive shape and scale
  MwGRep,      // within-Gibbs on reorthogonalized two-state coordinates
  MwGRepCau,   // as MwGRep with a Cauchy update on the asymmetry coordinate
  IndShp,      // independence sampler, shaped Student-t5 proposal
};

std::optional<Algorithm> parse_algorithm(const std::string& name);
const char* algorithm_name(Algorithm a);
/// True for variants that need a shape matrix from an earlier run.
bool algorithm_needs_shape(Algorithm a);

struct RunConfig {
  long n_iterations = 11000;
  long burn_in = 1000;
  std::uint64_t seed = 1;
  std::vector<double> initial;
  Transform transform = Transform::None;

  // Adaptive-run constants. Non-positive m0/scale and negative delta mean
  // "use the defaults": m0 = 2.38/sqrt(d), delta = m0/100, nonadaptive block
  // scale 2.38. adapt_delta = 0 freezes the overall scaling.
  double adapt_mix_weight = 0.05;
  double adapt_accept_step = 2.3;
  long adapt_gate = 10;
  double adapt_m0 = 0.0;
  double adapt_delta = -1.0;
  double nonadaptive_scale = 0.0;
  long sigma_snapshot_every = 100;
  // Test hooks: pin the shape estimate and/or stop it updating.
  std::optional<SquareMatrix> adapt_initial_sigma;
  bool adapt_update_sigma = true;

  void validate(int dim) const;
};

/// Row-major sample store, one row per iteration.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  SampleMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  void set_row(std::size_t r, std::span<const double> v) {
    std::copy(v.begin(), v.end(), data_.begin() + r * cols_);
  }
  std::vector<double> column(std::size_t c) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SigmaSnapshot {
  long iteration;
  SquareMatrix sigma;
};

/// Everything a single chain produces. Samples are stored in the original
/// parameter space regardless of the transform the walk ran under.
struct ChainOutput {
  SampleMatrix samples;
  std::vector<double> logpost;
  std::vector<long> proposals_per_block;
  std::vector<long> accepts_per_block;
  std::vector<std::uint8_t> accepted;         // per iteration: #blocks accepted
  std::vector<double> m_trace;                // adaptive scaling per iteration
  std::vector<std::uint8_t> adaptive_branch;  // 1 where the shaped branch proposed
  std::vector<SigmaSnapshot> sigma_snapshots;
  long likelihood_evals = 0;

  double acceptance_rate(std::size_t block = 0) const;
};

/// Block random walk Metropolis: propose x + scale * L * z (or the Cauchy
/// ratio variant), accept on the log-density difference. Honors
/// config.transform, recording samples back in the original space.
ChainOutput rwm_block(const TargetDensity& target, const ProposalSpec& proposal,
                      const RunConfig& config);

/// Multiplicative walk: the additive walk on log coordinates. Equivalent to
/// rwm_block with transform = Log (SignedLog is honored if preset).
ChainOutput rwm_multiplicative(const TargetDensity& target, const ProposalSpec& proposal,
                               const RunConfig& config);

/// One-at-a-time updates: each iteration sweeps all components in order,
/// costing one target evaluation per component.
ChainOutput mwg_sweep(const TargetDensity& target, std::span<const double> scales,
                      const RunConfig& config);

/// Per-component update recipe for mixed sweeps: multiplicative components
/// step on their logarithm (with the matching area correction), additive
/// ones step directly; either may draw Cauchy-tailed steps.
struct ComponentUpdate {
  double scale = 1.0;
  bool multiplicative = false;
  bool cauchy = false;
};

ChainOutput mwg_general(const TargetDensity& target,
                        std::span<const ComponentUpdate> components,
                        const RunConfig& config);

/// Heavy-tailed shaped jump: V/Z with V ~ N(0, scale^2 L L^T) and Z a
/// standard normal scalar. Never returns non-finite components.
std::vector<double> sample_shaped_cauchy(const SquareMatrix& shape_chol, double scale,
                                         Rng& rng);

/// Adaptive multiplicative walk. Proposals on log coordinates come from a
/// mixture: with probability 1 - adapt_mix_weight a shaped Gaussian
/// N(0, m_n^2 Sigma_n) where Sigma_n is the running covariance of the
/// log-samples so far, otherwise a fixed spherical fallback
/// N(0, nonadaptive_scale^2/d I). The shaped branch stays off until
/// adapt_gate proposals have been accepted (and whenever Sigma_n is not yet
/// positive definite). After a shaped-branch proposal at iteration i the
/// overall scaling moves by -delta/sqrt(i) on rejection and
/// +adapt_accept_step*delta/sqrt(i) on acceptance, so the branch equilibrates
/// at acceptance 1/(1 + adapt_accept_step).
ChainOutput adaptive_multiplicative_run(const TargetDensity& target, const RunConfig& config);

enum class BetaFamily { Gaussian, Cauchy };

/// Within-Gibbs sweep over the two-state reparameterized coordinates
/// (psi_bar, q, alpha, beta): multiplicative updates for the three positive
/// coordinates, additive (Gaussian or Cauchy) for beta. The target is over
/// the reparameterized space; recorded samples are mapped back to
/// (psi1, psi2, q12, q21).
ChainOutput mwg_reparam_run(const TargetDensity& reparam_target,
                            std::span<const double> scales, const RunConfig& config,
                            BetaFamily beta_family);

/// Independence sampler with a shifted-scaled multivariate Student-t (5 dof)
/// proposal: x* = center + scale * L * t5, accepted with the usual
/// Metropolis-Hastings ratio.
ChainOutput independence_sampler_run(const TargetDensity& target,
                                     std::span<const double> center,
                                     const SquareMatrix& shape_chol, double scale,
                                     const RunConfig& config);

/// Log density of the shifted-scaled multivariate t with 5 degrees of
/// freedom (the independence proposal), exposed for direct checks.
double log_student_t5_pdf(std::span<const double> x, std::span<const double> center,
                          const SquareMatrix& shape_chol, double scale);

struct AcceptanceWindow {
  double lo;
  double hi;
};

struct TuneResult {
  double scale = 1.0;
  double acceptance = 0.0;
  int pilots = 0;
  bool in_window = false;
};

/// Bisection on log(scale) against a monotone acceptance curve, probed by
/// short pilot runs. Stops once the measured acceptance lands in the window
/// or the pilot budget is exhausted (returning the last scale tried).
/// Throws std::invalid_argument unless 0 < lo < hi < 1 and budget >= 10.
TuneResult tune_scale(const std::function<double(double)>& pilot_acceptance,
                      double initial_scale, AcceptanceWindow window, int budget);

/// Same bracketing logic run for every component of a sweep at once; each
/// pilot reports all component acceptances together.
std::vector<double> tune_component_scales(
    const std::function<std::vector<double>(std::span<const double>)>& pilot_acceptances,
    std::vector<double> initial, AcceptanceWindow window, int budget);

/// Grid search minimizing a pilot autocorrelation-time estimate; the
/// fallback tuner for proposals with no useful acceptance-rate criterion
/// (Cauchy tails). Returns the grid point with the smallest pilot ACT.
double tune_scale_by_act(const std::function<double(double)>& pilot_act,
                         std::span<const double> grid);

/// Convenience: tunes a block sampler's scale on the given target.
TuneResult tune_block_scale(const TargetDensity& target, ProposalSpec proposal,
                            RunConfig pilot_config, AcceptanceWindow window, int budget);

/// Convenience: tunes per-component sweep scales on the given target.
std::vector<double> tune_mwg_scales(const TargetDensity& target, RunConfig pilot_config,
                                    AcceptanceWindow window, int budget);

/// Mean and covariance over a row window [row_begin, row_end).
std::vector<double> mean_of_rows(const SampleMatrix& m, std::size_t row_begin,
                                 std::size_t row_end);
SquareMatrix covariance_of_rows(const SampleMatrix& m, std::size_t row_begin,
                                std::size_t row_end);

/// Cholesky factor of sigma, nudging the diagonal by 1e-10 * trace/d when
/// the raw factorization fails. Throws if it still fails.
SquareMatrix shape_factor(SquareMatrix sigma);

}  // namespace rwmlab

#endif  // RWMLAB_SAMPLERS_HPP
