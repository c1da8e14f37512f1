#include "rwmlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rwmlab/rng.hpp"

namespace rwmlab {

namespace {

double series_mean(std::span<const double> s) {
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

// Lag covariance gamma_lag = sum of centered cross products / (n - lag).
double lag_covariance(std::span<const double> s, double mean, std::size_t lag) {
  const std::size_t n = s.size();
  double sum = 0.0;
  for (std::size_t j = 0; j + lag < n; ++j) {
    sum += (s[j] - mean) * (s[j + lag] - mean);
  }
  return sum / static_cast<double>(n - lag);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
  if (series.size() < 2 || max_lag >= series.size()) {
    throw std::invalid_argument("autocorrelation: need max_lag < length and length >= 2");
  }
  const double mean = series_mean(series);
  const double var = lag_covariance(series, mean, 0);
  if (!(var > 0.0)) {
    throw std::domain_error("autocorrelation: series has zero variance");
  }
  std::vector<double> rho(max_lag + 1);
  rho[0] = 1.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    rho[lag] = lag_covariance(series, mean, lag) / var;
  }
  return rho;
}

ActEstimate act_window(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) {
    throw std::invalid_argument("act_window: need at least 100 points");
  }
  const double mean = series_mean(series);
  const double var = lag_covariance(series, mean, 0);
  if (!(var > 0.0)) {
    throw std::domain_error("act_window: series has zero variance");
  }
  const std::size_t max_lag = n / 2;
  double sum = 0.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    const double rho = lag_covariance(series, mean, lag) / var;
    if (rho < 0.05) {
      return {1.0 + 2.0 * sum, static_cast<long>(lag), false};
    }
    sum += rho;
  }
  return {1.0 + 2.0 * sum, static_cast<long>(max_lag), true};
}

double cpu_adjusted_act(double act, double likelihood_evals_per_iteration) {
  if (!(likelihood_evals_per_iteration >= 1.0)) {
    throw std::invalid_argument("cpu_adjusted_act: multiplier must be >= 1");
  }
  return act * likelihood_evals_per_iteration;
}

double msejd(const SampleMatrix& samples, std::size_t row_begin, std::size_t row_end) {
  if (row_end > samples.rows() || row_end < row_begin + 2) {
    throw std::invalid_argument("msejd: need at least two rows");
  }
  double total = 0.0;
  for (std::size_t r = row_begin + 1; r < row_end; ++r) {
    for (std::size_t c = 0; c < samples.cols(); ++c) {
      const double d = samples(r, c) - samples(r - 1, c);
      total += d * d;
    }
  }
  return total / static_cast<double>(row_end - row_begin - 1);
}

double msejd(const SampleMatrix& samples) { return msejd(samples, 0, samples.rows()); }

double msjd(const SampleMatrix& samples, std::size_t row_begin, std::size_t row_end,
            const SquareMatrix& sigma) {
  if (row_end > samples.rows() || row_end < row_begin + 2) {
    throw std::invalid_argument("msjd: need at least two rows");
  }
  auto chol = cholesky(sigma);
  if (!chol) {
    throw std::invalid_argument("msjd: sigma must be positive definite");
  }
  const std::size_t d = samples.cols();
  std::vector<double> diff(d);
  double total = 0.0;
  for (std::size_t r = row_begin + 1; r < row_end; ++r) {
    for (std::size_t c = 0; c < d; ++c) diff[c] = samples(r, c) - samples(r - 1, c);
    const std::vector<double> y = solve_lower(*chol, diff);
    for (double yi : y) total += yi * yi;
  }
  return total / static_cast<double>(row_end - row_begin - 1);
}

double msjd(const SampleMatrix& samples, const SquareMatrix& sigma) {
  return msjd(samples, 0, samples.rows(), sigma);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) {
    throw std::invalid_argument("quantile_sorted: empty sample");
  }
  p = std::clamp(p, 0.0, 1.0);
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

QqTable qq_compare(std::span<const double> sample, std::span<const double> reference,
                   int n_quantiles, int n_resamples, std::uint64_t seed) {
  if (sample.size() < 100 || reference.size() < 100) {
    throw std::invalid_argument("qq_compare: need at least 100 points per side");
  }
  if (n_quantiles < 1 || n_resamples < 2) {
    throw std::invalid_argument("qq_compare: need n_quantiles >= 1 and n_resamples >= 2");
  }

  const ActEstimate act = act_window(sample);
  const std::size_t ess = std::max<std::size_t>(
      10, static_cast<std::size_t>(static_cast<double>(sample.size()) / act.act));
  if (ess > reference.size()) {
    throw std::invalid_argument("qq_compare: reference shorter than the sample's effective size");
  }

  std::vector<double> sample_sorted(sample.begin(), sample.end());
  std::sort(sample_sorted.begin(), sample_sorted.end());
  std::vector<double> ref_sorted(reference.begin(), reference.end());
  std::sort(ref_sorted.begin(), ref_sorted.end());

  QqTable table;
  table.sample_act = act.act;
  table.subsample_size = ess;
  table.rows.resize(n_quantiles);
  for (int k = 0; k < n_quantiles; ++k) {
    const double level = static_cast<double>(k + 1) / static_cast<double>(n_quantiles + 1);
    table.rows[k].level = level;
    table.rows[k].sample_q = quantile_sorted(sample_sorted, level);
    table.rows[k].ref_q = quantile_sorted(ref_sorted, level);
  }

  // Pointwise 95% band from quantiles of reference subsamples of the
  // sample's effective size.
  Rng rng(seed);
  std::vector<std::vector<double>> resampled(n_quantiles);
  for (auto& v : resampled) v.reserve(n_resamples);
  std::vector<double> pool(reference.begin(), reference.end());
  std::vector<double> sub(ess);
  for (int rep = 0; rep < n_resamples; ++rep) {
    // Partial Fisher-Yates: the first ess entries become the subsample.
    for (std::size_t i = 0; i < ess; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.integer(pool.size() - i));
      std::swap(pool[i], pool[j]);
      sub[i] = pool[i];
    }
    std::sort(sub.begin(), sub.end());
    for (int k = 0; k < n_quantiles; ++k) {
      resampled[k].push_back(quantile_sorted(sub, table.rows[k].level));
    }
  }
  for (int k = 0; k < n_quantiles; ++k) {
    std::sort(resampled[k].begin(), resampled[k].end());
    table.rows[k].band_lo = quantile_sorted(resampled[k], 0.025);
    table.rows[k].band_hi = quantile_sorted(resampled[k], 0.975);
  }
  return table;
}

void write_report_csv(const std::string& path, const DiagnosticsReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "param,act,act_cpu,ess,accept_rate,trunc_lag\n";
  for (const auto& p : report.params) {
    out << p.param << "," << format_double(p.act) << "," << format_double(p.act_cpu) << ","
        << format_double(p.ess) << "," << format_double(p.accept_rate) << "," << p.trunc_lag
        << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

DiagnosticsReport read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("param,", 0) != 0) {
    throw std::runtime_error("not a diagnostics report: " + path);
  }
  DiagnosticsReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    ParamDiagnostics p;
    std::getline(ss, p.param, ',');
    std::getline(ss, field, ',');
    p.act = std::stod(field);
    std::getline(ss, field, ',');
    p.act_cpu = std::stod(field);
    std::getline(ss, field, ',');
    p.ess = std::stod(field);
    std::getline(ss, field, ',');
    p.accept_rate = std::stod(field);
    std::getline(ss, field, ',');
    p.trunc_lag = std::stol(field);
    report.params.push_back(std::move(p));
  }
  return report;
}

void write_qq_csv(const std::string& path, std::span<const std::string> param_names,
                  std::span<const QqTable> tables) {
  if (param_names.size() != tables.size()) {
    throw std::invalid_argument("write_qq_csv: one table per parameter required");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "param,quantile,sample_q,ref_q,band_lo,band_hi\n";
  for (std::size_t i = 0; i < tables.size(); ++i) {
    for (const auto& row : tables[i].rows) {
      out << param_names[i] << "," << format_double(row.level) << ","
          << format_double(row.sample_q) << "," << format_double(row.ref_q) << ","
          << format_double(row.band_lo) << "," << format_double(row.band_hi) << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace rwmlab
