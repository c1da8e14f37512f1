// Command-line front end: simulate datasets, run experiment manifests, and
// post-process chains into tables, QQ comparisons, and scaling curves.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rwmlab/harness.hpp"

namespace {

rwmlab::MmppParams inline_params(const std::vector<double>& psi,
                                 const std::vector<double>& q_offdiag) {
  if (psi.empty()) {
    throw rwmlab::UsageError("need a dataset name (D1|D2|D3) or --psi/--q");
  }
  std::vector<double> theta(psi);
  theta.insert(theta.end(), q_offdiag.begin(), q_offdiag.end());
  try {
    return rwmlab::from_param_vector(theta);
  } catch (const std::invalid_argument& e) {
    throw rwmlab::UsageError(e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walk Metropolis laboratory for Markov modulated Poisson processes"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate an event dataset");
  std::string sim_name;
  std::vector<double> sim_psi, sim_q;
  double sim_tobs = 100.0;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  std::string sim_out = "events.txt";
  std::string sim_traj;
  sim->add_option("dataset", sim_name, "registry dataset name (D1|D2|D3)");
  sim->add_option("--psi", sim_psi, "inline intensities")->delimiter(',');
  sim->add_option("--q", sim_q, "inline off-diagonal rates, row-major")->delimiter(',');
  sim->add_option("--tobs", sim_tobs, "observation window (seconds)");
  sim->add_option("--seed", sim_seed, "simulation seed")->each([&](const std::string&) {
    sim_seed_set = true;
  });
  sim->add_option("--out", sim_out, "events file to write");
  sim->add_option("--trajectory", sim_traj, "optional hidden trajectory file");

  // run
  auto* run = app.add_subcommand("run", "run an experiment manifest");
  std::string run_manifest;
  std::string run_out, run_profile;
  long run_iters = 0, run_burnin = -1;
  std::uint64_t run_seed = 0;
  bool run_seed_set = false;
  run->add_option("manifest", run_manifest, "manifest file (key=value lines)")->required();
  run->add_option("--out", run_out, "override output directory");
  run->add_option("--profile", run_profile, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  run->add_option("--iters", run_iters, "override iteration count");
  run->add_option("--burnin", run_burnin, "override burn-in");
  run->add_option("--seed", run_seed, "override seed base")->each([&](const std::string&) {
    run_seed_set = true;
  });

  // table
  auto* table = app.add_subcommand("table", "aggregate diagnostics reports");
  std::string table_dir, table_out = "table.csv";
  table->add_option("reports", table_dir, "directory of *.report.csv files")->required();
  table->add_option("--out", table_out, "aggregated CSV to write");

  // qq
  auto* qq = app.add_subcommand("qq", "quantile comparison of two chain files");
  std::string qq_sample, qq_ref, qq_out = "qq.csv";
  long qq_skip_sample = 0, qq_skip_ref = 0;
  int qq_quantiles = 99, qq_resamples = 200;
  std::uint64_t qq_seed = 1;
  qq->add_option("sample", qq_sample, "chain file under test")->required();
  qq->add_option("reference", qq_ref, "reference chain file")->required();
  qq->add_option("--skip-sample", qq_skip_sample, "rows to drop from the sample chain");
  qq->add_option("--skip-ref", qq_skip_ref, "rows to drop from the reference chain");
  qq->add_option("--quantiles", qq_quantiles, "quantile count");
  qq->add_option("--resamples", qq_resamples, "subsamples for the confidence band");
  qq->add_option("--seed", qq_seed, "resampling seed");
  qq->add_option("--out", qq_out, "QQ table CSV to write");

  // curves
  auto* curves = app.add_subcommand("curves", "scaling-law curve (mu, speed, acceptance)");
  double cv_j = 1.0, cv_min = 0.05, cv_max = 20.0;
  int cv_points = 200;
  std::string cv_out = "curves.csv";
  curves->add_option("--j", cv_j, "target roughness");
  curves->add_option("--mu-min", cv_min, "grid lower end");
  curves->add_option("--mu-max", cv_max, "grid upper end");
  curves->add_option("--points", cv_points, "grid size");
  curves->add_option("--out", cv_out, "CSV to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      rwmlab::MmppParams params;
      double t_obs = sim_tobs;
      std::uint64_t seed = sim_seed;
      if (!sim_name.empty()) {
        const auto spec = rwmlab::find_dataset(sim_name);
        if (!spec) throw rwmlab::UsageError("unknown dataset name: " + sim_name);
        params = rwmlab::dataset_params(*spec);
        t_obs = spec->t_obs;
        if (!sim_seed_set) seed = spec->seed;
      } else {
        params = inline_params(sim_psi, sim_q);
        if (!(t_obs > 0.0)) throw rwmlab::UsageError("--tobs must be positive");
      }
      rwmlab::cmd_simulate(params, t_obs, seed, sim_out, sim_traj, std::cout);
    } else if (run->parsed()) {
      rwmlab::ExperimentManifest manifest = rwmlab::parse_manifest(run_manifest);
      if (!run_out.empty()) manifest.out_dir = run_out;
      if (!run_profile.empty()) manifest.profile = run_profile;
      if (run_iters > 0) manifest.iterations = run_iters;
      if (run_burnin >= 0) manifest.burn_in = run_burnin;
      if (run_seed_set) manifest.seed_base = run_seed;
      rwmlab::run_experiment(manifest, std::cout);
    } else if (table->parsed()) {
      rwmlab::cmd_table(table_dir, table_out, std::cout);
    } else if (qq->parsed()) {
      rwmlab::cmd_qq(qq_sample, qq_ref, qq_skip_sample, qq_skip_ref, qq_quantiles,
                     qq_resamples, qq_seed, qq_out);
    } else if (curves->parsed()) {
      rwmlab::cmd_curves(cv_j, cv_min, cv_max, cv_points, cv_out);
    }
  } catch (const rwmlab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
