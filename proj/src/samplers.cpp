#include "rwmlab/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rwmlab/mmpp.hpp"

namespace rwmlab {

std::vector<double> apply_transform(Transform t, std::span<const double> x) {
  std::vector<double> z(x.size());
  switch (t) {
    case Transform::None:
      std::copy(x.begin(), x.end(), z.begin());
      break;
    case Transform::Log:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) {
          throw std::invalid_argument("log transform requires positive coordinates");
        }
        z[i] = std::log(x[i]);
      }
      break;
    case Transform::SignedLog:
      for (std::size_t i = 0; i < x.size(); ++i) {
        z[i] = std::copysign(std::log1p(std::abs(x[i])), x[i]);
      }
      break;
  }
  return z;
}

std::vector<double> invert_transform(Transform t, std::span<const double> z) {
  std::vector<double> x(z.size());
  switch (t) {
    case Transform::None:
      std::copy(z.begin(), z.end(), x.begin());
      break;
    case Transform::Log:
      for (std::size_t i = 0; i < z.size(); ++i) x[i] = std::exp(z[i]);
      break;
    case Transform::SignedLog:
      for (std::size_t i = 0; i < z.size(); ++i) {
        x[i] = std::copysign(std::expm1(std::abs(z[i])), z[i]);
      }
      break;
  }
  return x;
}

double transform_log_jacobian(Transform t, std::span<const double> z) {
  double lj = 0.0;
  switch (t) {
    case Transform::None:
      break;
    case Transform::Log:
      for (double zi : z) lj += zi;
      break;
    case Transform::SignedLog:
      for (double zi : z) lj += std::abs(zi);
      break;
  }
  return lj;
}

void ProposalSpec::validate(int dim) const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("proposal scale must be positive and finite");
  }
  const bool shaped = family != ProposalFamily::SphericalGaussian;
  if (shaped) {
    if (!shape_chol || shape_chol->dim() != dim) {
      throw std::invalid_argument("shaped proposal requires a shape factor of matching dimension");
    }
    for (int i = 0; i < dim; ++i) {
      if (shape_chol->operator()(i, i) == 0.0) {
        throw std::invalid_argument("shape factor is singular");
      }
    }
  }
}

void RunConfig::validate(int dim) const {
  if (burn_in < 0 || n_iterations <= burn_in) {
    throw std::invalid_argument("need n_iterations > burn_in >= 0");
  }
  if (static_cast<int>(initial.size()) != dim) {
    throw std::invalid_argument("initial state dimension mismatch");
  }
  if (!(adapt_mix_weight >= 0.0) || adapt_mix_weight >= 1.0) {
    throw std::invalid_argument("adapt_mix_weight must lie in [0, 1)");
  }
  if (!(adapt_accept_step > 0.0) || adapt_gate < 0 || sigma_snapshot_every <= 0) {
    throw std::invalid_argument("bad adaptation constants");
  }
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
  static const std::pair<const char*, Algorithm> table[] = {
      {"Blk", Algorithm::Blk},           {"MwG", Algorithm::MwG},
      {"BlkShp", Algorithm::BlkShp},     {"BlkShpCau", Algorithm::BlkShpCau},
      {"BlkShpMul", Algorithm::BlkShpMul}, {"BlkAdpMul", Algorithm::BlkAdpMul},
      {"MwGRep", Algorithm::MwGRep},     {"MwGRepCau", Algorithm::MwGRepCau},
      {"IndShp", Algorithm::IndShp},
  };
  for (const auto& [n, a] : table) {
    if (name == n) return a;
  }
  return std::nullopt;
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Blk: return "Blk";
    case Algorithm::MwG: return "MwG";
    case Algorithm::BlkShp: return "BlkShp";
    case Algorithm::BlkShpCau: return "BlkShpCau";
    case Algorithm::BlkShpMul: return "BlkShpMul";
    case Algorithm::BlkAdpMul: return "BlkAdpMul";
    case Algorithm::MwGRep: return "MwGRep";
    case Algorithm::MwGRepCau: return "MwGRepCau";
    case Algorithm::IndShp: return "IndShp";
  }
  return "?";
}

bool algorithm_needs_shape(Algorithm a) {
  return a == Algorithm::BlkShp || a == Algorithm::BlkShpCau ||
         a == Algorithm::BlkShpMul || a == Algorithm::IndShp;
}

std::vector<double> SampleMatrix::column(std::size_t c) const {
  std::vector<double> v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

double ChainOutput::acceptance_rate(std::size_t block) const {
  if (block >= proposals_per_block.size() || proposals_per_block[block] == 0) return 0.0;
  return static_cast<double>(accepts_per_block[block]) /
         static_cast<double>(proposals_per_block[block]);
}

namespace {

// log(u) for the Metropolis comparison; u = 0 is harmless (-inf accepts
// against any finite ratio is false only for -inf ratios).
double log_uniform(Rng& rng) { return std::log(rng.uniform()); }

void draw_jump(const ProposalSpec& proposal, int dim, Rng& rng,
               std::vector<double>& normals, std::vector<double>& jump) {
  for (;;) {
    for (int i = 0; i < dim; ++i) normals[i] = rng.normal();
    if (proposal.family == ProposalFamily::SphericalGaussian) {
      for (int i = 0; i < dim; ++i) jump[i] = proposal.scale * normals[i];
    } else {
      const SquareMatrix& l = *proposal.shape_chol;
      for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += l(i, j) * normals[j];
        jump[i] = proposal.scale * s;
      }
      if (proposal.family == ProposalFamily::ShapedCauchy) {
        const double z = rng.normal();
        for (int i = 0; i < dim; ++i) jump[i] /= z;
      }
    }
    bool ok = true;
    for (int i = 0; i < dim; ++i) ok = ok && std::isfinite(jump[i]);
    if (ok) return;  // redraw on a zero/denormal Cauchy denominator
  }
}

struct TransformedState {
  double logpost_transformed;  // target + log-Jacobian, the walk's density
  double logpost;              // target in the original space
};

}  // namespace

ChainOutput rwm_block(const TargetDensity& target, const ProposalSpec& proposal,
                      const RunConfig& config) {
  const int dim = target.dim;
  proposal.validate(dim);
  config.validate(dim);

  Rng rng(config.seed);
  ChainOutput out;
  const std::size_t n = static_cast<std::size_t>(config.n_iterations);
  out.samples = SampleMatrix(n, dim);
  out.logpost.resize(n);
  out.accepted.assign(n, 0);
  out.proposals_per_block.assign(1, 0);
  out.accepts_per_block.assign(1, 0);

  std::vector<double> z = apply_transform(config.transform, config.initial);
  std::vector<double> x = config.initial;
  auto eval = [&](std::span<const double> zs, std::span<const double> xs) -> TransformedState {
    const double lp = target.logpdf(xs);
    return {lp + transform_log_jacobian(config.transform, zs), lp};
  };
  TransformedState cur = eval(z, x);
  if (!(cur.logpost_transformed > kLogZero)) {
    throw std::invalid_argument("initial state outside target support");
  }

  std::vector<double> normals(dim), jump(dim), zstar(dim), xstar(dim);
  for (std::size_t it = 0; it < n; ++it) {
    draw_jump(proposal, dim, rng, normals, jump);
    for (int i = 0; i < dim; ++i) zstar[i] = z[i] + jump[i];
    xstar = invert_transform(config.transform, zstar);
    const TransformedState prop = eval(zstar, xstar);
    ++out.likelihood_evals;
    ++out.proposals_per_block[0];
    if (log_uniform(rng) < prop.logpost_transformed - cur.logpost_transformed) {
      z = zstar;
      x = xstar;
      cur = prop;
      ++out.accepts_per_block[0];
      out.accepted[it] = 1;
    }
    out.samples.set_row(it, x);
    out.logpost[it] = cur.logpost;
  }
  return out;
}

ChainOutput rwm_multiplicative(const TargetDensity& target, const ProposalSpec& proposal,
                               const RunConfig& config) {
  RunConfig cfg = config;
  if (cfg.transform == Transform::None) cfg.transform = Transform::Log;
  return rwm_block(target, proposal, cfg);
}

ChainOutput mwg_general(const TargetDensity& target,
                        std::span<const ComponentUpdate> components,
                        const RunConfig& config) {
  const int dim = target.dim;
  if (static_cast<int>(components.size()) != dim) {
    throw std::invalid_argument("mwg_general: one update spec per component required");
  }
  for (const auto& c : components) {
    if (!(c.scale > 0.0) || !std::isfinite(c.scale)) {
      throw std::invalid_argument("mwg_general: component scales must be positive");
    }
  }
  config.validate(dim);
  for (int k = 0; k < dim; ++k) {
    if (components[k].multiplicative && !(config.initial[k] > 0.0)) {
      throw std::invalid_argument("mwg_general: multiplicative component must start positive");
    }
  }

  Rng rng(config.seed);
  ChainOutput out;
  const std::size_t n = static_cast<std::size_t>(config.n_iterations);
  out.samples = SampleMatrix(n, dim);
  out.logpost.resize(n);
  out.accepted.assign(n, 0);
  out.proposals_per_block.assign(dim, 0);
  out.accepts_per_block.assign(dim, 0);

  std::vector<double> x = config.initial;
  double cur = target.logpdf(x);
  if (!(cur > kLogZero)) {
    throw std::invalid_argument("initial state outside target support");
  }

  std::vector<double> xstar(dim);
  for (std::size_t it = 0; it < n; ++it) {
    for (int k = 0; k < dim; ++k) {
      double step = components[k].scale * rng.normal();
      if (components[k].cauchy) {
        double denom = rng.normal();
        while (!std::isfinite(step / denom)) {
          step = components[k].scale * rng.normal();
          denom = rng.normal();
        }
        step /= denom;
      }
      xstar = x;
      double log_jacobian = 0.0;
      if (components[k].multiplicative) {
        xstar[k] = x[k] * std::exp(step);
        log_jacobian = step;  // log(x*_k / x_k)
      } else {
        xstar[k] = x[k] + step;
      }
      const double prop = target.logpdf(xstar);
      ++out.likelihood_evals;
      ++out.proposals_per_block[k];
      if (log_uniform(rng) < prop - cur + log_jacobian) {
        x[k] = xstar[k];
        cur = prop;
        ++out.accepts_per_block[k];
        ++out.accepted[it];
      }
    }
    out.samples.set_row(it, x);
    out.logpost[it] = cur;
  }
  return out;
}

ChainOutput mwg_sweep(const TargetDensity& target, std::span<const double> scales,
                      const RunConfig& config) {
  std::vector<ComponentUpdate> components(scales.size());
  for (std::size_t k = 0; k < scales.size(); ++k) components[k].scale = scales[k];
  return mwg_general(target, components, config);
}

std::vector<double> sample_shaped_cauchy(const SquareMatrix& shape_chol, double scale,
                                         Rng& rng) {
  const int dim = shape_chol.dim();
  for (int i = 0; i < dim; ++i) {
    if (shape_chol(i, i) == 0.0) {
      throw std::invalid_argument("sample_shaped_cauchy: singular shape factor");
    }
  }
  std::vector<double> normals(dim), jump(dim);
  ProposalSpec spec;
  spec.family = ProposalFamily::ShapedCauchy;
  spec.scale = scale;
  spec.shape_chol = shape_chol;
  draw_jump(spec, dim, rng, normals, jump);
  return jump;
}

namespace {

// Running mean/covariance with O(1/n) updates (Welford). The increment
// (z - old_mean)(z - new_mean)^T is symmetric because the two deltas are
// proportional, so only the lower triangle is kept.
class RunningCovariance {
 public:
  explicit RunningCovariance(int dim) : dim_(dim), mean_(dim, 0.0), delta_(dim), m2_(dim) {}

  void add(std::span<const double> z) {
    ++count_;
    for (int i = 0; i < dim_; ++i) delta_[i] = z[i] - mean_[i];
    for (int i = 0; i < dim_; ++i) mean_[i] += delta_[i] / static_cast<double>(count_);
    for (int i = 0; i < dim_; ++i) {
      const double post = z[i] - mean_[i];
      for (int j = 0; j <= i; ++j) m2_(i, j) += post * delta_[j];
    }
  }

  long count() const { return count_; }

  SquareMatrix covariance() const {
    SquareMatrix s(dim_);
    const double denom = static_cast<double>(count_ - 1);
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j <= i; ++j) {
        s(i, j) = m2_(i, j) / denom;
        s(j, i) = s(i, j);
      }
    }
    return s;
  }

 private:
  int dim_;
  long count_ = 0;
  std::vector<double> mean_;
  std::vector<double> delta_;
  SquareMatrix m2_;
};

}  // namespace

ChainOutput adaptive_multiplicative_run(const TargetDensity& target, const RunConfig& config) {
  const int dim = target.dim;
  config.validate(dim);
  if (!config.adapt_update_sigma && !config.adapt_initial_sigma) {
    throw std::invalid_argument("frozen adaptation requires adapt_initial_sigma");
  }

  const double m0 = config.adapt_m0 > 0.0 ? config.adapt_m0 : 2.38 / std::sqrt(dim);
  const double delta = config.adapt_delta >= 0.0 ? config.adapt_delta : m0 / 100.0;
  const double lambda0 = config.nonadaptive_scale > 0.0 ? config.nonadaptive_scale : 2.38;
  const double fallback_sd = lambda0 / std::sqrt(dim);

  Rng rng(config.seed);
  ChainOutput out;
  const std::size_t n = static_cast<std::size_t>(config.n_iterations);
  out.samples = SampleMatrix(n, dim);
  out.logpost.resize(n);
  out.accepted.assign(n, 0);
  out.adaptive_branch.assign(n, 0);
  out.m_trace.resize(n);
  out.proposals_per_block.assign(1, 0);
  out.accepts_per_block.assign(1, 0);

  std::vector<double> z = apply_transform(Transform::Log, config.initial);
  std::vector<double> x = config.initial;
  auto eval = [&](std::span<const double> zs, std::span<const double> xs) -> TransformedState {
    const double lp = target.logpdf(xs);
    return {lp + transform_log_jacobian(Transform::Log, zs), lp};
  };
  TransformedState cur = eval(z, x);
  if (!(cur.logpost_transformed > kLogZero)) {
    throw std::invalid_argument("initial state outside target support");
  }

  RunningCovariance running(dim);
  running.add(z);
  double m = m0;
  long accepted_total = 0;
  std::optional<SquareMatrix> frozen_chol;
  if (config.adapt_initial_sigma) frozen_chol = cholesky(*config.adapt_initial_sigma);

  std::vector<double> normals(dim), jump(dim), zstar(dim), xstar(dim);
  for (std::size_t it = 0; it < n; ++it) {
    const long iteration = static_cast<long>(it) + 1;
    const bool want_adaptive = rng.uniform() >= config.adapt_mix_weight;
    bool use_adaptive = false;
    std::optional<SquareMatrix> chol_now;
    if (want_adaptive && accepted_total >= config.adapt_gate) {
      if (!config.adapt_update_sigma) {
        chol_now = frozen_chol;
      } else if (running.count() >= 2) {
        chol_now = cholesky(running.covariance());
      }
      use_adaptive = chol_now.has_value();  // singular estimate: fall back
    }

    for (int i = 0; i < dim; ++i) normals[i] = rng.normal();
    if (use_adaptive) {
      const SquareMatrix& l = *chol_now;
      for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += l(i, j) * normals[j];
        jump[i] = m * s;
      }
    } else {
      for (int i = 0; i < dim; ++i) jump[i] = fallback_sd * normals[i];
    }

    for (int i = 0; i < dim; ++i) zstar[i] = z[i] + jump[i];
    xstar = invert_transform(Transform::Log, zstar);
    const TransformedState prop = eval(zstar, xstar);
    ++out.likelihood_evals;
    ++out.proposals_per_block[0];
    const bool accept = log_uniform(rng) < prop.logpost_transformed - cur.logpost_transformed;
    if (accept) {
      z = zstar;
      x = xstar;
      cur = prop;
      ++out.accepts_per_block[0];
      out.accepted[it] = 1;
      ++accepted_total;
    }
    if (use_adaptive) {
      const double step = delta / std::sqrt(static_cast<double>(iteration));
      m += accept ? config.adapt_accept_step * step : -step;
      m = std::max(m, 1e-12);
    }
    if (config.adapt_update_sigma) running.add(z);

    out.samples.set_row(it, x);
    out.logpost[it] = cur.logpost;
    out.m_trace[it] = m;
    out.adaptive_branch[it] = use_adaptive ? 1 : 0;
    if (iteration % config.sigma_snapshot_every == 0 && running.count() >= 2) {
      out.sigma_snapshots.push_back({iteration, running.covariance()});
    }
  }
  return out;
}

ChainOutput mwg_reparam_run(const TargetDensity& reparam_target,
                            std::span<const double> scales, const RunConfig& config,
                            BetaFamily beta_family) {
  if (reparam_target.dim != 4 || scales.size() != 4) {
    throw std::invalid_argument("mwg_reparam_run: reparameterized space has four coordinates");
  }
  std::vector<ComponentUpdate> components(4);
  for (int k = 0; k < 3; ++k) {
    components[k].scale = scales[k];
    components[k].multiplicative = true;
  }
  components[3].scale = scales[3];
  components[3].cauchy = beta_family == BetaFamily::Cauchy;

  ChainOutput out = mwg_general(reparam_target, components, config);

  // Record in the original parameter space.
  std::vector<double> original(4);
  for (std::size_t it = 0; it < out.samples.rows(); ++it) {
    const auto row = out.samples.row(it);
    const ReparamPoint p{row[0], row[1], row[2], row[3]};
    auto theta = from_reparam(p);
    if (!theta) {
      throw std::runtime_error("mwg_reparam_run: recorded state left the support");
    }
    std::copy(theta->begin(), theta->end(), original.begin());
    out.samples.set_row(it, original);
  }
  return out;
}

double log_student_t5_pdf(std::span<const double> x, std::span<const double> center,
                          const SquareMatrix& shape_chol, double scale) {
  constexpr double nu = 5.0;
  const int dim = shape_chol.dim();
  std::vector<double> diff(dim);
  for (int i = 0; i < dim; ++i) diff[i] = (x[i] - center[i]) / scale;
  const std::vector<double> u = solve_lower(shape_chol, diff);
  double qf = 0.0;
  for (double ui : u) qf += ui * ui;
  double log_det = dim * std::log(scale);
  for (int i = 0; i < dim; ++i) log_det += std::log(std::abs(shape_chol(i, i)));
  const double half = 0.5 * (nu + dim);
  return std::lgamma(half) - std::lgamma(0.5 * nu) -
         0.5 * dim * std::log(nu * M_PI) - log_det - half * std::log1p(qf / nu);
}

ChainOutput independence_sampler_run(const TargetDensity& target,
                                     std::span<const double> center,
                                     const SquareMatrix& shape_chol, double scale,
                                     const RunConfig& config) {
  const int dim = target.dim;
  config.validate(dim);
  if (shape_chol.dim() != dim || static_cast<int>(center.size()) != dim) {
    throw std::invalid_argument("independence_sampler_run: dimension mismatch");
  }
  if (!(scale > 0.0)) {
    throw std::invalid_argument("independence_sampler_run: scale must be positive");
  }

  Rng rng(config.seed);
  ChainOutput out;
  const std::size_t n = static_cast<std::size_t>(config.n_iterations);
  out.samples = SampleMatrix(n, dim);
  out.logpost.resize(n);
  out.accepted.assign(n, 0);
  out.proposals_per_block.assign(1, 0);
  out.accepts_per_block.assign(1, 0);

  std::vector<double> x = config.initial;
  double cur = target.logpdf(x);
  if (!(cur > kLogZero)) {
    throw std::invalid_argument("initial state outside target support");
  }
  double cur_q = log_student_t5_pdf(x, center, shape_chol, scale);

  std::vector<double> normals(dim), xstar(dim);
  for (std::size_t it = 0; it < n; ++it) {
    for (int i = 0; i < dim; ++i) normals[i] = rng.normal();
    double chi2 = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double g = rng.normal();
      chi2 += g * g;
    }
    const double tail = std::sqrt(chi2 / 5.0);
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int j = 0; j <= i; ++j) s += shape_chol(i, j) * normals[j];
      xstar[i] = center[i] + scale * s / tail;
    }
    const double prop = target.logpdf(xstar);
    ++out.likelihood_evals;
    ++out.proposals_per_block[0];
    const double prop_q = log_student_t5_pdf(xstar, center, shape_chol, scale);
    if (log_uniform(rng) < (prop - cur) + (cur_q - prop_q)) {
      x = xstar;
      cur = prop;
      cur_q = prop_q;
      ++out.accepts_per_block[0];
      out.accepted[it] = 1;
    }
    out.samples.set_row(it, x);
    out.logpost[it] = cur;
  }
  return out;
}

TuneResult tune_scale(const std::function<double(double)>& pilot_acceptance,
                      double initial_scale, AcceptanceWindow window, int budget) {
  if (!(window.lo > 0.0) || !(window.hi < 1.0) || !(window.lo < window.hi)) {
    throw std::invalid_argument("tune_scale: window must satisfy 0 < lo < hi < 1");
  }
  if (budget < 10) {
    throw std::invalid_argument("tune_scale: budget must allow at least 10 pilots");
  }
  if (!(initial_scale > 0.0)) {
    throw std::invalid_argument("tune_scale: initial scale must be positive");
  }

  double scale = initial_scale;
  double lo_bracket = 0.0;  // largest scale seen with acceptance above the window
  double hi_bracket = 0.0;  // smallest scale seen with acceptance below the window
  TuneResult result;
  for (int p = 1; p <= budget; ++p) {
    const double acc = pilot_acceptance(scale);
    result = {scale, acc, p, acc >= window.lo && acc <= window.hi};
    if (result.in_window) return result;
    if (acc > window.hi) {
      lo_bracket = scale;
      scale = hi_bracket > 0.0 ? std::sqrt(lo_bracket * hi_bracket) : scale * 4.0;
    } else {
      hi_bracket = scale;
      scale = lo_bracket > 0.0 ? std::sqrt(lo_bracket * hi_bracket) : scale / 4.0;
    }
  }
  return result;
}

std::vector<double> tune_component_scales(
    const std::function<std::vector<double>(std::span<const double>)>& pilot_acceptances,
    std::vector<double> initial, AcceptanceWindow window, int budget) {
  if (!(window.lo > 0.0) || !(window.hi < 1.0) || !(window.lo < window.hi)) {
    throw std::invalid_argument("tune_component_scales: window must satisfy 0 < lo < hi < 1");
  }
  if (budget < 10) {
    throw std::invalid_argument("tune_component_scales: budget must allow at least 10 pilots");
  }
  const std::size_t k = initial.size();
  std::vector<double> scales = std::move(initial);
  std::vector<double> lo_bracket(k, 0.0), hi_bracket(k, 0.0);
  for (int p = 1; p <= budget; ++p) {
    const std::vector<double> acc = pilot_acceptances(scales);
    bool all_in = true;
    for (std::size_t i = 0; i < k; ++i) {
      if (acc[i] >= window.lo && acc[i] <= window.hi) continue;
      all_in = false;
      if (acc[i] > window.hi) {
        lo_bracket[i] = scales[i];
        scales[i] = hi_bracket[i] > 0.0 ? std::sqrt(lo_bracket[i] * hi_bracket[i])
                                        : scales[i] * 4.0;
      } else {
        hi_bracket[i] = scales[i];
        scales[i] = lo_bracket[i] > 0.0 ? std::sqrt(lo_bracket[i] * hi_bracket[i])
                                        : scales[i] / 4.0;
      }
    }
    if (all_in) break;
  }
  return scales;
}

double tune_scale_by_act(const std::function<double(double)>& pilot_act,
                         std::span<const double> grid) {
  if (grid.empty()) {
    throw std::invalid_argument("tune_scale_by_act: empty grid");
  }
  double best_scale = grid[0];
  double best_act = pilot_act(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double act = pilot_act(grid[i]);
    if (act < best_act) {
      best_act = act;
      best_scale = grid[i];
    }
  }
  return best_scale;
}

TuneResult tune_block_scale(const TargetDensity& target, ProposalSpec proposal,
                            RunConfig pilot_config, AcceptanceWindow window, int budget) {
  int pilot_index = 0;
  const std::uint64_t base = pilot_config.seed;
  auto pilot = [&](double scale) {
    proposal.scale = scale;
    pilot_config.seed = derive_seed(base, 0x70 + pilot_index++);
    return rwm_block(target, proposal, pilot_config).acceptance_rate();
  };
  return tune_scale(pilot, proposal.scale, window, budget);
}

std::vector<double> tune_mwg_scales(const TargetDensity& target, RunConfig pilot_config,
                                    AcceptanceWindow window, int budget) {
  int pilot_index = 0;
  const std::uint64_t base = pilot_config.seed;
  auto pilot = [&](std::span<const double> scales) {
    pilot_config.seed = derive_seed(base, 0x80 + pilot_index++);
    ChainOutput run = mwg_sweep(target, scales, pilot_config);
    std::vector<double> acc(scales.size());
    for (std::size_t i = 0; i < scales.size(); ++i) acc[i] = run.acceptance_rate(i);
    return acc;
  };
  std::vector<double> initial(target.dim, 1.0);
  return tune_component_scales(pilot, initial, window, budget);
}

std::vector<double> mean_of_rows(const SampleMatrix& m, std::size_t row_begin,
                                 std::size_t row_end) {
  if (row_end <= row_begin || row_end > m.rows()) {
    throw std::invalid_argument("mean_of_rows: bad row window");
  }
  std::vector<double> mean(m.cols(), 0.0);
  for (std::size_t r = row_begin; r < row_end; ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) mean[c] += m(r, c);
  }
  const double n = static_cast<double>(row_end - row_begin);
  for (double& v : mean) v /= n;
  return mean;
}

SquareMatrix covariance_of_rows(const SampleMatrix& m, std::size_t row_begin,
                                std::size_t row_end) {
  if (row_end < row_begin + 2 || row_end > m.rows()) {
    throw std::invalid_argument("covariance_of_rows: need at least two rows");
  }
  const std::vector<double> mean = mean_of_rows(m, row_begin, row_end);
  const int d = static_cast<int>(m.cols());
  SquareMatrix s(d);
  for (std::size_t r = row_begin; r < row_end; ++r) {
    for (int i = 0; i < d; ++i) {
      const double di = m(r, i) - mean[i];
      for (int j = 0; j <= i; ++j) s(i, j) += di * (m(r, j) - mean[j]);
    }
  }
  const double denom = static_cast<double>(row_end - row_begin - 1);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      s(i, j) /= denom;
      s(j, i) = s(i, j);
    }
  }
  return s;
}

SquareMatrix shape_factor(SquareMatrix sigma) {
  auto l = cholesky(sigma);
  if (!l) {
    const double nudge = 1e-10 * sigma.trace() / sigma.dim();
    for (int i = 0; i < sigma.dim(); ++i) sigma(i, i) += nudge;
    l = cholesky(sigma);
  }
  if (!l) {
    throw std::invalid_argument("shape_factor: covariance is not positive definite");
  }
  return *l;
}

}  // namespace rwmlab
