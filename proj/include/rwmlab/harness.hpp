#ifndef RWMLAB_HARNESS_HPP
#define RWMLAB_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwmlab/diagnostics.hpp"
#include "rwmlab/mmpp.hpp"
#include "rwmlab/samplers.hpp"

namespace rwmlab {

/// Bad command line or manifest; the CLI maps this to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A runnable plan that cannot proceed as ordered (e.g. a shape-requiring
/// algorithm with no source run available).
struct OrchestrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A named ground-truth configuration for simulated data.
struct DatasetSpec {
  std::string name;
  int d;
  std::vector<double> psi;
  std::vector<double> q_offdiag;  // row-major off-diagonal rates
  double t_obs;
  std::uint64_t seed;
};

const std::vector<DatasetSpec>& dataset_registry();
std::optional<DatasetSpec> find_dataset(const std::string& name);
MmppParams dataset_params(const DatasetSpec& spec);

/// Stationary mean event intensity nu' psi.
double stationary_event_rate(const MmppParams& params);

/// Flat parameter names: psi1..psid then q12, q13, ..., q21, ...
std::vector<std::string> param_names(int d);

struct ExperimentManifest {
  std::string dataset;             // registry name; empty when inline params given
  std::vector<double> psi;         // inline ground truth (priors + start point)
  std::vector<double> q_offdiag;
  double t_obs = 0.0;
  std::string events_path;
  std::vector<Algorithm> algorithms;
  int replicates = 3;
  long iterations = 0;             // 0: resolved from profile
  long burn_in = -1;               // -1: resolved from profile
  std::string profile = "desk";    // desk: 5500/500, paper: 11000/1000
  std::uint64_t seed_base = 1;
  std::string out_dir = ".";
  int tune_budget = 10;
  long pilot_iterations = 2000;
  long shape_window_begin = 1000;  // post-burn-in iteration offsets
  long shape_window_end = 2000;
};

/// Parses the line-oriented key=value manifest format ('#' starts a
/// comment). Throws UsageError on unknown keys or inconsistent values.
ExperimentManifest parse_manifest(const std::string& path);
ExperimentManifest parse_manifest_text(const std::string& text);

/// Ground-truth parameters implied by the manifest (registry or inline).
MmppParams manifest_params(const ExperimentManifest& manifest);
void resolve_run_lengths(ExperimentManifest& manifest);

/// Posterior over the flat parameter vector with independent exponential
/// priors.
TargetDensity make_mmpp_posterior(EventData data, PriorSpec prior, int d);

/// Posterior over the two-state reparameterized coordinates
/// (psi_bar, q, alpha, beta), including the change-of-variables term, so the
/// chain targets the same posterior expressed in the new coordinates.
TargetDensity make_mmpp_reparam_posterior(EventData data, PriorSpec prior);

/// One tuned-and-run chain.
struct AlgorithmRun {
  Algorithm algorithm;
  ChainOutput chain;                         // canonical labels, original space
  double tuned_scale = 0.0;                  // block scale (or lambda0 for the adaptive run)
  std::vector<double> tuned_component_scales;
  std::optional<SquareMatrix> shape;         // original-space shape, when one was used
};

/// Tunes (where the algorithm calls for it) and runs one chain on an MMPP
/// posterior. Priors are exponential with means the ground-truth values and
/// the chain starts there. Shape-requiring variants read a window of
/// blk_source. Rows of the returned chain are relabeled canonically.
AlgorithmRun run_mmpp_algorithm(Algorithm algorithm, const EventData& data,
                                const MmppParams& truth, const RunConfig& base_config,
                                const ChainOutput* blk_source, long shape_row_begin,
                                long shape_row_end, int tune_budget, long pilot_iterations,
                                std::ostream* log);

/// Per-parameter diagnostics for an MMPP chain: intensities are measured
/// as-is, switching rates on the log scale. CPU adjustment uses the chain's
/// recorded evaluation count.
DiagnosticsReport make_mmpp_report(const ChainOutput& chain, long burn_in, int d,
                                   Algorithm algorithm,
                                   const std::optional<SquareMatrix>& shape);

/// Chain file: "iter,<params...>,logpost,accepted_blocks".
void write_chain_csv(const std::string& path, std::span<const std::string> names,
                     const ChainOutput& chain);
struct LoadedChain {
  std::vector<std::string> names;
  SampleMatrix samples;
  std::vector<double> logpost;
};
LoadedChain read_chain_csv(const std::string& path);

/// Adaptation sidecar: "iter,m,sigma_snapshot_id".
void write_adapt_csv(const std::string& path, const ChainOutput& chain);

/// simulate: writes an events file (and optional hidden trajectory), logs
/// the event count and stationary mean intensity.
void cmd_simulate(const MmppParams& params, double t_obs, std::uint64_t seed,
                  const std::string& out_path, const std::string& trajectory_path,
                  std::ostream& log);

/// run: executes every (algorithm, replicate) pair of the manifest, writing
/// chain, report, and adaptation files under out_dir.
void run_experiment(const ExperimentManifest& manifest, std::ostream& log);

/// table: aggregates report CSVs under report_dir into mean CPU-adjusted
/// ACTs per algorithm and parameter (plus a per-replicate appendix file).
void cmd_table(const std::string& report_dir, const std::string& out_csv, std::ostream& log);

/// curves: scaling-law table (mu, speed, acceptance) on a log-spaced grid.
void cmd_curves(double roughness, double mu_min, double mu_max, int points,
                const std::string& out_csv);

/// qq: per-parameter quantile comparison of two chain files.
void cmd_qq(const std::string& sample_chain, const std::string& reference_chain,
            long skip_sample, long skip_reference, int n_quantiles, int n_resamples,
            std::uint64_t seed, const std::string& out_csv);

}  // namespace rwmlab

#endif  // RWMLAB_HARNESS_HPP
