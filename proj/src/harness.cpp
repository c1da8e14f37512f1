#include "rwmlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "rwmlab/efficiency.hpp"
#include "rwmlab/rng.hpp"

namespace fs = std::filesystem;

namespace rwmlab {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError(std::string("cannot parse ") + what + ": " + tok);
    }
  }
  return out;
}

}  // namespace

const std::vector<DatasetSpec>& dataset_registry() {
  static const std::vector<DatasetSpec> registry = {
      {"D1", 2, {10.0, 30.0}, {1.0, 1.0}, 100.0, 1},
      {"D2", 2, {10.0, 17.0}, {1.0, 1.0}, 100.0, 2},
      {"D3", 3, {10.0, 17.0, 30.0}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, 100.0, 3},
  };
  return registry;
}

std::optional<DatasetSpec> find_dataset(const std::string& name) {
  for (const auto& d : dataset_registry()) {
    if (d.name == name) return d;
  }
  return std::nullopt;
}

namespace {

MmppParams params_from_rates(int d, const std::vector<double>& psi,
                             const std::vector<double>& q_offdiag) {
  if (static_cast<int>(psi.size()) != d ||
      q_offdiag.size() != static_cast<std::size_t>(d) * (d - 1)) {
    throw UsageError("inconsistent psi / off-diagonal rate counts");
  }
  std::vector<double> theta(psi);
  theta.insert(theta.end(), q_offdiag.begin(), q_offdiag.end());
  return from_param_vector(theta);
}

}  // namespace

MmppParams dataset_params(const DatasetSpec& spec) {
  return params_from_rates(spec.d, spec.psi, spec.q_offdiag);
}

double stationary_event_rate(const MmppParams& params) {
  const ProbVector nu = stationary_dist(params.q);
  double rate = 0.0;
  for (int i = 0; i < params.d; ++i) rate += nu[i] * params.psi[i];
  return rate;
}

std::vector<std::string> param_names(int d) {
  std::vector<std::string> names;
  for (int i = 1; i <= d; ++i) names.push_back("psi" + std::to_string(i));
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= d; ++j) {
      if (i != j) names.push_back("q" + std::to_string(i) + std::to_string(j));
    }
  }
  return names;
}

ExperimentManifest parse_manifest_text(const std::string& text) {
  ExperimentManifest m;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("manifest lines must be key=value, got: " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "dataset") {
        m.dataset = value;
      } else if (key == "events") {
        m.events_path = value;
      } else if (key == "algorithms") {
        for (const auto& name : split(value, ',')) {
          const auto a = parse_algorithm(name);
          if (!a) throw UsageError("unknown algorithm id: " + name);
          m.algorithms.push_back(*a);
        }
      } else if (key == "replicates") {
        m.replicates = std::stoi(value);
      } else if (key == "iterations") {
        m.iterations = std::stol(value);
      } else if (key == "burnin") {
        m.burn_in = std::stol(value);
      } else if (key == "profile") {
        m.profile = value;
      } else if (key == "seed_base") {
        m.seed_base = std::stoull(value);
      } else if (key == "out") {
        m.out_dir = value;
      } else if (key == "psi") {
        m.psi = parse_doubles(value, "psi");
      } else if (key == "q") {
        m.q_offdiag = parse_doubles(value, "q");
      } else if (key == "tobs") {
        m.t_obs = std::stod(value);
      } else if (key == "tune_budget") {
        m.tune_budget = std::stoi(value);
      } else if (key == "pilot_iterations") {
        m.pilot_iterations = std::stol(value);
      } else if (key == "shape_window_begin") {
        m.shape_window_begin = std::stol(value);
      } else if (key == "shape_window_end") {
        m.shape_window_end = std::stol(value);
      } else {
        throw UsageError("unknown manifest key: " + key);
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception&) {
      throw UsageError("cannot parse manifest value for " + key + ": " + value);
    }
  }

  if (m.events_path.empty()) throw UsageError("manifest is missing events=");
  if (m.algorithms.empty()) throw UsageError("manifest is missing algorithms=");
  if (m.replicates < 1) throw UsageError("replicates must be >= 1");
  if (m.dataset.empty() && m.psi.empty()) {
    throw UsageError("manifest needs dataset= or inline psi=/q=");
  }
  if (!m.dataset.empty() && !find_dataset(m.dataset)) {
    throw UsageError("unknown dataset name: " + m.dataset);
  }
  return m;
}

ExperimentManifest parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open manifest: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest_text(ss.str());
}

MmppParams manifest_params(const ExperimentManifest& manifest) {
  if (!manifest.dataset.empty()) {
    return dataset_params(*find_dataset(manifest.dataset));
  }
  const int d = static_cast<int>(manifest.psi.size());
  return params_from_rates(d, manifest.psi, manifest.q_offdiag);
}

void resolve_run_lengths(ExperimentManifest& manifest) {
  long iters = 5500, burn = 500;
  if (manifest.profile == "paper") {
    iters = 11000;
    burn = 1000;
  } else if (manifest.profile != "desk") {
    throw UsageError("unknown profile (expected desk or paper): " + manifest.profile);
  }
  if (manifest.iterations == 0) manifest.iterations = iters;
  if (manifest.burn_in < 0) manifest.burn_in = burn;
  if (manifest.burn_in < 0 || manifest.iterations <= manifest.burn_in) {
    throw UsageError("need iterations > burnin >= 0");
  }
}

TargetDensity make_mmpp_posterior(EventData data, PriorSpec prior, int d) {
  auto shared_data = std::make_shared<EventData>(std::move(data));
  auto shared_prior = std::make_shared<PriorSpec>(std::move(prior));
  TargetDensity t;
  t.dim = d * d;
  t.logpdf = [shared_data, shared_prior](std::span<const double> theta) {
    return log_posterior(theta, *shared_data, *shared_prior);
  };
  return t;
}

TargetDensity make_mmpp_reparam_posterior(EventData data, PriorSpec prior) {
  if (prior.means.size() != 4) {
    throw std::invalid_argument("reparameterized posterior is two-state only");
  }
  auto shared_data = std::make_shared<EventData>(std::move(data));
  auto shared_prior = std::make_shared<PriorSpec>(std::move(prior));
  TargetDensity t;
  t.dim = 4;
  t.logpdf = [shared_data, shared_prior](std::span<const double> v) {
    const ReparamPoint p{v[0], v[1], v[2], v[3]};
    if (!(p.psi_bar > 0.0) || !(p.q > 0.0) || !(p.alpha > 0.0)) return kLogZero;
    const auto theta = from_reparam(p);
    if (!theta) return kLogZero;
    const double lp = log_posterior(*theta, *shared_data, *shared_prior);
    if (lp == kLogZero) return kLogZero;
    return lp + reparam_log_jacobian(p);
  };
  return t;
}

namespace {

SquareMatrix window_covariance(const SampleMatrix& samples, long r0, long r1, bool logs) {
  if (!logs) return covariance_of_rows(samples, r0, r1);
  SampleMatrix logged(static_cast<std::size_t>(r1 - r0), samples.cols());
  for (long r = r0; r < r1; ++r) {
    for (std::size_t c = 0; c < samples.cols(); ++c) {
      logged(r - r0, c) = std::log(samples(r, c));
    }
  }
  return covariance_of_rows(logged, 0, logged.rows());
}

double mean_pilot_act(const ChainOutput& pilot) {
  double total = 0.0;
  for (std::size_t c = 0; c < pilot.samples.cols(); ++c) {
    try {
      total += act_window(pilot.samples.column(c)).act;
    } catch (const std::domain_error&) {
      // a pilot that never moved loses the grid search outright
      return std::numeric_limits<double>::infinity();
    }
  }
  return total / static_cast<double>(pilot.samples.cols());
}

std::vector<double> act_grid(double center) {
  std::vector<double> grid;
  for (int k = -4; k <= 2; ++k) grid.push_back(center * std::pow(2.0, 0.5 * k));
  return grid;
}

void canonicalize_rows(SampleMatrix& samples) {
  std::vector<double> row(samples.cols());
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    auto in = samples.row(r);
    std::copy(in.begin(), in.end(), row.begin());
    samples.set_row(r, canonicalize(row));
  }
}

constexpr AcceptanceWindow kBlockWindow{0.25, 0.35};
constexpr AcceptanceWindow kComponentWindow{0.40, 0.45};

}  // namespace

AlgorithmRun run_mmpp_algorithm(Algorithm algorithm, const EventData& data,
                                const MmppParams& truth, const RunConfig& base_config,
                                const ChainOutput* blk_source, long shape_row_begin,
                                long shape_row_end, int tune_budget, long pilot_iterations,
                                std::ostream* log) {
  truth.validate();
  const std::vector<double> theta_true = to_param_vector(truth);
  const int dim = static_cast<int>(theta_true.size());
  const PriorSpec prior{theta_true};
  const TargetDensity target = make_mmpp_posterior(data, prior, truth.d);

  RunConfig cfg = base_config;
  cfg.initial = theta_true;

  RunConfig pilot_cfg = cfg;
  pilot_cfg.n_iterations = pilot_iterations;
  pilot_cfg.burn_in = 0;
  pilot_cfg.seed = derive_seed(cfg.seed, 0xA0);

  AlgorithmRun result;
  result.algorithm = algorithm;

  if (algorithm_needs_shape(algorithm)) {
    if (blk_source == nullptr) {
      throw OrchestrationError(std::string(algorithm_name(algorithm)) +
                               " needs a shape source: run Blk first");
    }
    if (shape_row_begin < 0 || shape_row_end <= shape_row_begin ||
        static_cast<std::size_t>(shape_row_end) > blk_source->samples.rows()) {
      throw OrchestrationError("shape window does not fit inside the Blk source run");
    }
  }

  switch (algorithm) {
    case Algorithm::Blk: {
      ProposalSpec prop;
      prop.scale = 1.0;
      const TuneResult tuned = tune_block_scale(target, prop, pilot_cfg, kBlockWindow, tune_budget);
      prop.scale = tuned.scale;
      result.tuned_scale = tuned.scale;
      result.chain = rwm_block(target, prop, cfg);
      break;
    }
    case Algorithm::MwG: {
      result.tuned_component_scales =
          tune_mwg_scales(target, pilot_cfg, kComponentWindow, tune_budget);
      result.chain = mwg_sweep(target, result.tuned_component_scales, cfg);
      break;
    }
    case Algorithm::BlkShp:
    case Algorithm::BlkShpCau: {
      SquareMatrix sigma =
          window_covariance(blk_source->samples, shape_row_begin, shape_row_end, false);
      ProposalSpec prop;
      prop.family = ProposalFamily::ShapedGaussian;
      prop.scale = 2.38 / std::sqrt(dim);
      prop.shape_chol = shape_factor(sigma);
      const TuneResult tuned = tune_block_scale(target, prop, pilot_cfg, kBlockWindow, tune_budget);
      prop.scale = tuned.scale;
      if (algorithm == Algorithm::BlkShpCau) {
        // No useful acceptance criterion with infinite-variance jumps: pick
        // the scale whose short pilot mixes fastest.
        prop.family = ProposalFamily::ShapedCauchy;
        RunConfig act_cfg = pilot_cfg;
        act_cfg.n_iterations = 1000;
        int pilot_index = 0;
        auto pilot_act = [&](double scale) {
          ProposalSpec p = prop;
          p.scale = scale;
          act_cfg.seed = derive_seed(cfg.seed, 0xB0 + pilot_index++);
          return mean_pilot_act(rwm_block(target, p, act_cfg));
        };
        const auto grid = act_grid(tuned.scale);
        prop.scale = tune_scale_by_act(pilot_act, grid);
      }
      result.tuned_scale = prop.scale;
      result.shape = sigma;
      result.chain = rwm_block(target, prop, cfg);
      break;
    }
    case Algorithm::BlkShpMul: {
      SquareMatrix sigma_log =
          window_covariance(blk_source->samples, shape_row_begin, shape_row_end, true);
      ProposalSpec prop;
      prop.family = ProposalFamily::ShapedGaussian;
      prop.scale = 2.38 / std::sqrt(dim);
      prop.shape_chol = shape_factor(sigma_log);
      RunConfig mul_pilot = pilot_cfg;
      mul_pilot.transform = Transform::Log;
      const TuneResult tuned = tune_block_scale(target, prop, mul_pilot, kBlockWindow, tune_budget);
      prop.scale = tuned.scale;
      result.tuned_scale = tuned.scale;
      RunConfig mul_cfg = cfg;
      mul_cfg.transform = Transform::Log;
      result.chain = rwm_block(target, prop, mul_cfg);
      break;
    }
    case Algorithm::BlkAdpMul: {
      ProposalSpec prop;
      prop.scale = 2.38 / std::sqrt(dim);
      RunConfig mul_pilot = pilot_cfg;
      mul_pilot.transform = Transform::Log;
      const TuneResult tuned = tune_block_scale(target, prop, mul_pilot, kBlockWindow, tune_budget);
      RunConfig adp_cfg = cfg;
      adp_cfg.nonadaptive_scale = tuned.scale * std::sqrt(dim);
      if (dim > 4) {
        // Higher-dimensional variant: longer gate, equilibrium nearer 0.25.
        adp_cfg.adapt_gate = 100;
        adp_cfg.adapt_accept_step = 3.0;
      }
      result.tuned_scale = adp_cfg.nonadaptive_scale;
      result.chain = adaptive_multiplicative_run(target, adp_cfg);
      break;
    }
    case Algorithm::MwGRep:
    case Algorithm::MwGRepCau: {
      if (truth.d != 2) {
        throw OrchestrationError("reparameterized sweeps are defined for two-state processes");
      }
      const TargetDensity rtarget = make_mmpp_reparam_posterior(data, prior);
      const auto rep0 = to_reparam(canonicalize(theta_true));
      if (!rep0) {
        throw OrchestrationError("ground truth has equal intensities: reparameterization is singular");
      }
      RunConfig rep_cfg = cfg;
      rep_cfg.initial = {rep0->psi_bar, rep0->q, rep0->alpha, rep0->beta};
      RunConfig rep_pilot = pilot_cfg;
      rep_pilot.initial = rep_cfg.initial;

      std::vector<ComponentUpdate> comps(4);
      for (int k = 0; k < 3; ++k) comps[k].multiplicative = true;
      int pilot_index = 0;
      auto pilot = [&](std::span<const double> scales) {
        for (int k = 0; k < 4; ++k) comps[k].scale = scales[k];
        rep_pilot.seed = derive_seed(cfg.seed, 0xC0 + pilot_index++);
        const ChainOutput run = mwg_general(rtarget, comps, rep_pilot);
        std::vector<double> acc(4);
        for (int k = 0; k < 4; ++k) acc[k] = run.acceptance_rate(k);
        return acc;
      };
      std::vector<double> scales = tune_component_scales(pilot, {1.0, 1.0, 1.0, 1.0},
                                                         kComponentWindow, tune_budget);
      const BetaFamily family =
          algorithm == Algorithm::MwGRepCau ? BetaFamily::Cauchy : BetaFamily::Gaussian;
      if (family == BetaFamily::Cauchy) {
        RunConfig act_cfg = rep_pilot;
        act_cfg.n_iterations = 1000;
        int act_index = 0;
        auto pilot_act = [&](double beta_scale) {
          std::vector<double> s = scales;
          s[3] = beta_scale;
          act_cfg.seed = derive_seed(cfg.seed, 0xD0 + act_index++);
          return mean_pilot_act(mwg_reparam_run(rtarget, s, act_cfg, BetaFamily::Cauchy));
        };
        scales[3] = tune_scale_by_act(pilot_act, act_grid(scales[3]));
      }
      result.tuned_component_scales = scales;
      result.chain = mwg_reparam_run(rtarget, scales, rep_cfg, family);
      break;
    }
    case Algorithm::IndShp: {
      SquareMatrix sigma =
          window_covariance(blk_source->samples, shape_row_begin, shape_row_end, false);
      const std::vector<double> center =
          mean_of_rows(blk_source->samples, shape_row_begin, shape_row_end);
      result.shape = sigma;
      result.tuned_scale = 1.0;
      result.chain = independence_sampler_run(target, center, shape_factor(sigma), 1.0, cfg);
      break;
    }
  }

  canonicalize_rows(result.chain.samples);
  if (log) {
    *log << algorithm_name(algorithm) << ": acceptance=" << result.chain.acceptance_rate(0);
    if (result.tuned_scale > 0.0) *log << " scale=" << result.tuned_scale;
    *log << " evals=" << result.chain.likelihood_evals << "\n";
  }
  return result;
}

DiagnosticsReport make_mmpp_report(const ChainOutput& chain, long burn_in, int d,
                                   Algorithm algorithm,
                                   const std::optional<SquareMatrix>& shape) {
  const std::size_t n = chain.samples.rows();
  const std::size_t post = static_cast<std::size_t>(burn_in);
  const auto names = param_names(d);
  const double evals_per_iter = std::max(
      1.0, static_cast<double>(chain.likelihood_evals) / static_cast<double>(n));

  long total_props = 0, total_accs = 0;
  for (std::size_t b = 0; b < chain.proposals_per_block.size(); ++b) {
    total_props += chain.proposals_per_block[b];
    total_accs += chain.accepts_per_block[b];
  }
  const double overall_rate =
      total_props > 0 ? static_cast<double>(total_accs) / static_cast<double>(total_props) : 0.0;

  DiagnosticsReport report;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const bool is_rate = c >= static_cast<std::size_t>(d);
    std::vector<double> series;
    series.reserve(n - post);
    for (std::size_t r = post; r < n; ++r) {
      series.push_back(is_rate ? std::log(chain.samples(r, c)) : chain.samples(r, c));
    }
    ActEstimate act;
    try {
      act = act_window(series);
    } catch (const std::domain_error&) {
      throw OrchestrationError("chain never moved after burn-in: parameter " + names[c] +
                               " has zero variance");
    }
    ParamDiagnostics p;
    p.param = is_rate ? "log_" + names[c] : names[c];
    p.act = act.act;
    p.act_cpu = cpu_adjusted_act(act.act, evals_per_iter);
    p.ess = static_cast<double>(series.size()) / act.act;
    p.accept_rate = algorithm == Algorithm::MwG ? chain.acceptance_rate(c) : overall_rate;
    p.trunc_lag = act.truncation_lag;
    p.truncated = act.truncated_at_half;
    report.params.push_back(std::move(p));
  }
  report.msejd_value = msejd(chain.samples, post, n);
  if (shape) report.msjd_value = msjd(chain.samples, post, n, *shape);
  return report;
}

void write_chain_csv(const std::string& path, std::span<const std::string> names,
                     const ChainOutput& chain) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "iter";
  for (const auto& n : names) out << "," << n;
  out << ",logpost,accepted_blocks\n";
  for (std::size_t r = 0; r < chain.samples.rows(); ++r) {
    out << r + 1;
    for (std::size_t c = 0; c < chain.samples.cols(); ++c) {
      out << "," << format_double(chain.samples(r, c));
    }
    out << "," << format_double(chain.logpost[r]) << ","
        << static_cast<int>(chain.accepted[r]) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

LoadedChain read_chain_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open chain file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty chain file: " + path);
  auto header = split(line, ',');
  if (header.size() < 4 || header.front() != "iter" || header[header.size() - 2] != "logpost" ||
      header.back() != "accepted_blocks") {
    throw std::runtime_error("not a chain file: " + path);
  }
  LoadedChain chain;
  chain.names.assign(header.begin() + 1, header.end() - 2);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw std::runtime_error("malformed chain row in " + path);
    }
    std::vector<double> row;
    for (std::size_t i = 1; i + 2 < fields.size(); ++i) row.push_back(std::stod(fields[i]));
    chain.logpost.push_back(std::stod(fields[fields.size() - 2]));
    rows.push_back(std::move(row));
  }
  chain.samples = SampleMatrix(rows.size(), chain.names.size());
  for (std::size_t r = 0; r < rows.size(); ++r) chain.samples.set_row(r, rows[r]);
  return chain;
}

void write_adapt_csv(const std::string& path, const ChainOutput& chain) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "iter,m,sigma_snapshot_id\n";
  std::size_t snap = 0;
  for (std::size_t r = 0; r < chain.m_trace.size(); ++r) {
    const long iter = static_cast<long>(r) + 1;
    out << iter << "," << format_double(chain.m_trace[r]) << ",";
    if (snap < chain.sigma_snapshots.size() && chain.sigma_snapshots[snap].iteration == iter) {
      out << snap + 1;
      ++snap;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void cmd_simulate(const MmppParams& params, double t_obs, std::uint64_t seed,
                  const std::string& out_path, const std::string& trajectory_path,
                  std::ostream& log) {
  params.validate();
  std::vector<StateJump> trajectory;
  const EventData data =
      simulate(params, t_obs, seed, trajectory_path.empty() ? nullptr : &trajectory);
  write_events_file(out_path, data);
  if (!trajectory_path.empty()) write_trajectory_file(trajectory_path, trajectory);
  log << "events=" << data.count() << " t_obs=" << format_double(t_obs)
      << " stationary_mean_intensity=" << format_double(stationary_event_rate(params)) << "\n";
}

void run_experiment(const ExperimentManifest& manifest_in, std::ostream& log) {
  ExperimentManifest manifest = manifest_in;
  resolve_run_lengths(manifest);
  const MmppParams truth = manifest_params(manifest);
  const EventData data = read_events_file(manifest.events_path);
  fs::create_directories(manifest.out_dir);

  // Blk runs first within each replicate so shape-requiring variants can
  // consume its designated window.
  std::vector<Algorithm> order;
  for (auto a : manifest.algorithms) {
    if (a == Algorithm::Blk) order.push_back(a);
  }
  for (auto a : manifest.algorithms) {
    if (a != Algorithm::Blk) order.push_back(a);
  }

  const long w0 = manifest.burn_in + manifest.shape_window_begin;
  const long w1 = manifest.burn_in + manifest.shape_window_end;

  for (int rep = 0; rep < manifest.replicates; ++rep) {
    const std::uint64_t replicate_seed = manifest.seed_base + static_cast<std::uint64_t>(rep);
    std::optional<ChainOutput> blk_chain;

    for (Algorithm algo : order) {
      RunConfig cfg;
      cfg.n_iterations = manifest.iterations;
      cfg.burn_in = manifest.burn_in;
      cfg.seed = derive_seed(replicate_seed, static_cast<std::uint64_t>(algo) + 1);

      const ChainOutput* source = nullptr;
      if (algorithm_needs_shape(algo)) {
        if (!blk_chain) {
          // Fall back to a Blk chain file from an earlier invocation.
          const std::string blk_path =
              (fs::path(manifest.out_dir) / ("Blk_rep" + std::to_string(rep + 1) + ".chain.csv"))
                  .string();
          if (fs::exists(blk_path)) {
            const LoadedChain loaded = read_chain_csv(blk_path);
            ChainOutput c;
            c.samples = loaded.samples;
            blk_chain = std::move(c);
          } else {
            throw OrchestrationError(std::string(algorithm_name(algo)) +
                                     " needs a shape source: run Blk first (no " + blk_path +
                                     ")");
          }
        }
        source = &*blk_chain;
      }

      log << "[" << (manifest.dataset.empty() ? "inline" : manifest.dataset) << " rep "
          << rep + 1 << "] ";
      AlgorithmRun run = run_mmpp_algorithm(algo, data, truth, cfg, source, w0, w1,
                                            manifest.tune_budget, manifest.pilot_iterations,
                                            &log);

      const std::string base =
          (fs::path(manifest.out_dir) /
           (std::string(algorithm_name(algo)) + "_rep" + std::to_string(rep + 1)))
              .string();
      write_chain_csv(base + ".chain.csv", param_names(truth.d), run.chain);
      const DiagnosticsReport report =
          make_mmpp_report(run.chain, manifest.burn_in, truth.d, algo, run.shape);
      write_report_csv(base + ".report.csv", report);
      if (algo == Algorithm::BlkAdpMul) write_adapt_csv(base + ".adapt.csv", run.chain);

      if (algo == Algorithm::Blk) blk_chain = std::move(run.chain);
    }
  }
}

void cmd_table(const std::string& report_dir, const std::string& out_csv, std::ostream& log) {
  struct Cell {
    std::vector<std::pair<int, double>> act_cpu;  // (replicate, value)
  };
  std::map<std::string, std::map<std::string, Cell>> table;
  std::map<std::string, double> multiplier;
  std::vector<std::string> param_order;

  bool any = false;
  for (const auto& entry : fs::directory_iterator(report_dir)) {
    const std::string name = entry.path().filename().string();
    const auto pos = name.find("_rep");
    if (pos == std::string::npos || name.size() < pos + 5 ||
        name.find(".report.csv") == std::string::npos) {
      continue;
    }
    const std::string algo = name.substr(0, pos);
    const int rep = std::stoi(name.substr(pos + 4));
    const DiagnosticsReport report = read_report_csv(entry.path().string());
    any = true;
    for (const auto& p : report.params) {
      table[algo][p.param].act_cpu.emplace_back(rep, p.act_cpu);
      if (p.act > 0.0) multiplier[algo] = std::max(multiplier[algo], p.act_cpu / p.act);
      if (std::find(param_order.begin(), param_order.end(), p.param) == param_order.end()) {
        param_order.push_back(p.param);
      }
    }
  }
  if (!any) throw OrchestrationError("no report files found under " + report_dir);

  std::ofstream out(out_csv);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_csv);
  out << "algorithm,param,mean_act_cpu,replicates\n";
  std::string appendix_path = out_csv;
  const auto dot = appendix_path.rfind(".csv");
  if (dot != std::string::npos) appendix_path.erase(dot);
  appendix_path += "_replicates.csv";
  std::ofstream appendix(appendix_path);
  appendix << "algorithm,replicate,param,act_cpu\n";

  log << "mean CPU-adjusted ACT per parameter\n";
  log << "algorithm";
  for (const auto& p : param_order) log << "\t" << p;
  log << "\n";
  for (const auto& [algo, cells] : table) {
    log << algo;
    for (const auto& pname : param_order) {
      const auto it = cells.find(pname);
      if (it == cells.end() || it->second.act_cpu.empty()) {
        log << "\t-";
        continue;
      }
      double mean = 0.0;
      for (const auto& [rep, v] : it->second.act_cpu) mean += v;
      mean /= static_cast<double>(it->second.act_cpu.size());
      out << algo << "," << pname << "," << format_double(mean) << ","
          << it->second.act_cpu.size() << "\n";
      for (const auto& [rep, v] : it->second.act_cpu) {
        appendix << algo << "," << rep << "," << pname << "," << format_double(v) << "\n";
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.1f", mean);
      log << "\t" << buf;
    }
    log << "\n";
  }
  for (const auto& [algo, mult] : multiplier) {
    if (mult > 1.001) {
      log << "note: " << algo << " ACTs multiplied by " << mult
          << " (target evaluations per iteration) for CPU-comparable figures\n";
    }
  }
}

void cmd_curves(double roughness, double mu_min, double mu_max, int points,
                const std::string& out_csv) {
  if (!(mu_min > 0.0) || !(mu_max > mu_min) || points < 2) {
    throw UsageError("curves: need 0 < mu_min < mu_max and points >= 2");
  }
  std::ofstream out(out_csv);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_csv);
  out << "mu,speed,acceptance\n";
  const double ratio = mu_max / mu_min;
  for (int i = 0; i < points; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(points - 1);
    const EfficiencyCurvePoint pt = diffusion_speed(mu_min * std::pow(ratio, frac), roughness);
    out << format_double(pt.mu) << "," << format_double(pt.speed) << ","
        << format_double(pt.acceptance) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + out_csv);
}

void cmd_qq(const std::string& sample_chain, const std::string& reference_chain,
            long skip_sample, long skip_reference, int n_quantiles, int n_resamples,
            std::uint64_t seed, const std::string& out_csv) {
  const LoadedChain sample = read_chain_csv(sample_chain);
  const LoadedChain reference = read_chain_csv(reference_chain);
  if (sample.names != reference.names) {
    throw UsageError("qq: chains have different parameter sets");
  }
  std::vector<QqTable> tables;
  for (std::size_t c = 0; c < sample.names.size(); ++c) {
    std::vector<double> s = sample.samples.column(c);
    std::vector<double> r = reference.samples.column(c);
    if (skip_sample >= static_cast<long>(s.size()) ||
        skip_reference >= static_cast<long>(r.size())) {
      throw UsageError("qq: skip exceeds chain length");
    }
    s.erase(s.begin(), s.begin() + skip_sample);
    r.erase(r.begin(), r.begin() + skip_reference);
    tables.push_back(qq_compare(s, r, n_quantiles, n_resamples,
                                derive_seed(seed, c)));
  }
  write_qq_csv(out_csv, sample.names, tables);
}

}  // namespace rwmlab
