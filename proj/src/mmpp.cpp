#include "rwmlab/mmpp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "rwmlab/rng.hpp"

namespace rwmlab {

void MmppParams::validate() const {
  if (d < 1 || static_cast<int>(psi.size()) != d || q.dim() != d) {
    throw std::invalid_argument("MmppParams: inconsistent dimensions");
  }
  for (double p : psi) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("MmppParams: intensities must be nonnegative");
    }
  }
  if (!is_generator(q, 1e-12)) {
    throw std::invalid_argument("MmppParams: q is not a conservative generator");
  }
}

std::vector<double> to_param_vector(const MmppParams& p) {
  std::vector<double> theta(p.psi.begin(), p.psi.end());
  for (int i = 0; i < p.d; ++i)
    for (int j = 0; j < p.d; ++j)
      if (i != j) theta.push_back(p.q(i, j));
  return theta;
}

int states_from_param_dim(std::size_t len) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(len))));
  if (d < 1 || static_cast<std::size_t>(d) * d != len) {
    throw std::invalid_argument("parameter vector length must be d^2");
  }
  return d;
}

MmppParams from_param_vector(std::span<const double> theta) {
  const int d = states_from_param_dim(theta.size());
  MmppParams p;
  p.d = d;
  p.psi.assign(theta.begin(), theta.begin() + d);
  p.q = SquareMatrix(d);
  std::size_t k = d;
  for (int i = 0; i < d; ++i) {
    double row = 0.0;
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      p.q(i, j) = theta[k++];
      row += p.q(i, j);
    }
    p.q(i, i) = -row;
  }
  return p;
}

EventData EventData::from_events(double t_obs, std::vector<double> events) {
  if (!(t_obs > 0.0) || !std::isfinite(t_obs)) {
    throw std::invalid_argument("EventData: t_obs must be positive");
  }
  double prev = 0.0;
  for (double e : events) {
    if (!(e > prev) || e > t_obs) {
      throw std::invalid_argument("EventData: events must be strictly increasing in (0, t_obs]");
    }
    prev = e;
  }
  EventData d;
  d.t_obs = t_obs;
  d.events = std::move(events);
  d.gaps.reserve(d.events.size() + 1);
  prev = 0.0;
  for (double e : d.events) {
    d.gaps.push_back(e - prev);
    prev = e;
  }
  d.gaps.push_back(t_obs - prev);
  return d;
}

EventData simulate(const MmppParams& params, double t_obs, std::uint64_t seed,
                   std::vector<StateJump>* trajectory) {
  params.validate();
  if (!(t_obs > 0.0)) {
    throw std::invalid_argument("simulate: t_obs must be positive");
  }
  ProbVector nu = stationary_dist(params.q);
  Rng rng(seed);

  int state = params.d - 1;
  {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < params.d; ++i) {
      acc += nu[i];
      if (u < acc) {
        state = i;
        break;
      }
    }
  }
  if (trajectory) trajectory->push_back({0.0, state});

  std::vector<double> events;
  double t = 0.0;
  while (t < t_obs) {
    const double exit_rate = -params.q(state, state);
    const double sojourn_end = exit_rate > 0.0 ? t + rng.exponential(exit_rate) : t_obs;
    const double seg_end = std::min(sojourn_end, t_obs);

    const double intensity = params.psi[state];
    if (intensity > 0.0) {
      double s = t;
      for (;;) {
        s += rng.exponential(intensity);
        if (s >= seg_end) break;
        events.push_back(s);
      }
    }

    if (sojourn_end >= t_obs) break;
    t = sojourn_end;

    // Embedded-chain jump.
    const double u = rng.uniform() * exit_rate;
    double acc = 0.0;
    int next = state;
    for (int j = 0; j < params.d; ++j) {
      if (j == state) continue;
      next = j;
      acc += params.q(state, j);
      if (u < acc) break;
    }
    state = next;
    if (trajectory) trajectory->push_back({t, state});
  }
  return EventData::from_events(t_obs, std::move(events));
}

namespace {

// Propagates the row vector v through exp(A*t) for 2x2 A, returning the log
// of the factor pulled out to keep entries bounded. Closed form via the
// trace/deviator split: with m = tr(A)/2 and B = A - mI, B^2 = disc * I.
double propagate_exp_2x2(const SquareMatrix& a, double t, std::vector<double>& v) {
  const double m = 0.5 * (a(0, 0) + a(1, 1));
  const double p = 0.5 * (a(0, 0) - a(1, 1));
  const double b = a(0, 1);
  const double c = a(1, 0);
  const double disc = p * p + b * c;

  double e00, e01, e10, e11, log_scale;
  if (disc >= 0.0) {
    const double delta = std::sqrt(disc);
    const double dt = delta * t;
    // exp(At) = e^{(m+delta)t} [ (1+u)/2 I + (1-u)/(2 delta) B ], u = e^{-2dt}
    const double u = std::exp(-2.0 * dt);
    const double ch = 0.5 * (1.0 + u);
    const double sc = dt > 1e-8 ? -std::expm1(-2.0 * dt) / (2.0 * delta) : t * u;
    e00 = ch + sc * p;
    e01 = sc * b;
    e10 = sc * c;
    e11 = ch - sc * p;
    log_scale = (m + delta) * t;
  } else {
    const double delta = std::sqrt(-disc);
    const double dt = delta * t;
    const double sc = dt > 1e-8 ? std::sin(dt) / delta : t;
    const double ch = std::cos(dt);
    e00 = ch + sc * p;
    e01 = sc * b;
    e10 = sc * c;
    e11 = ch - sc * p;
    log_scale = m * t;
  }
  const double w0 = v[0] * e00 + v[1] * e10;
  const double w1 = v[0] * e01 + v[1] * e11;
  v[0] = std::max(w0, 0.0);
  v[1] = std::max(w1, 0.0);
  return log_scale;
}

// General-dimension variant: shift out the dominant diagonal, exponentiate
// the remainder.
double propagate_exp_general(const SquareMatrix& a, double t, std::vector<double>& v) {
  const int n = a.dim();
  double mu = a(0, 0);
  for (int i = 1; i < n; ++i) mu = std::max(mu, a(i, i));
  SquareMatrix shifted = a;
  for (int i = 0; i < n; ++i) shifted(i, i) -= mu;
  SquareMatrix e = mat_exp(shifted, t);
  std::vector<double> w = row_times(v, e);
  for (int i = 0; i < n; ++i) v[i] = std::max(w[i], 0.0);
  return mu * t;
}

bool params_in_support(const MmppParams& params) {
  if (params.d < 1 || static_cast<int>(params.psi.size()) != params.d ||
      params.q.dim() != params.d) {
    return false;
  }
  for (double p : params.psi) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
  }
  return is_generator(params.q, 1e-9);
}

}  // namespace

double log_likelihood(const MmppParams& params, const EventData& data,
                      const ProbVector& nu) {
  if (!params_in_support(params)) return kLogZero;
  const int n_states = params.d;
  if (static_cast<int>(nu.size()) != n_states) return kLogZero;

  SquareMatrix a = params.q;
  for (int i = 0; i < n_states; ++i) a(i, i) -= params.psi[i];

  std::vector<double> v = nu;
  double log_acc = 0.0;
  const std::size_t n = data.count();
  for (std::size_t i = 0; i <= n; ++i) {
    const double gap = data.gaps[i];
    log_acc += n_states == 2 ? propagate_exp_2x2(a, gap, v)
                             : propagate_exp_general(a, gap, v);
    if (i < n) {
      for (int s = 0; s < n_states; ++s) v[s] *= params.psi[s];
    }
    double total = 0.0;
    for (double x : v) total += x;
    if (!(total > 0.0) || !std::isfinite(total)) return kLogZero;
    log_acc += std::log(total);
    for (double& x : v) x /= total;
  }
  return log_acc;
}

double log_likelihood(const MmppParams& params, const EventData& data) {
  if (!params_in_support(params)) return kLogZero;
  ProbVector nu;
  try {
    nu = stationary_dist(params.q);
  } catch (const std::invalid_argument&) {
    return kLogZero;
  }
  return log_likelihood(params, data, nu);
}

double log_posterior(std::span<const double> theta, const EventData& data,
                     const PriorSpec& prior) {
  const int d = states_from_param_dim(theta.size());
  (void)d;
  if (prior.means.size() != theta.size()) {
    throw std::invalid_argument("log_posterior: prior dimension mismatch");
  }
  double log_prior = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!(theta[i] > 0.0) || !std::isfinite(theta[i])) return kLogZero;
    log_prior += -theta[i] / prior.means[i] - std::log(prior.means[i]);
  }
  const double ll = log_likelihood(from_param_vector(theta), data);
  if (ll == kLogZero) return kLogZero;
  return ll + log_prior;
}

std::vector<double> canonicalize(std::span<const double> theta) {
  const MmppParams p = from_param_vector(theta);
  std::vector<int> order(p.d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return p.psi[i] < p.psi[j]; });
  MmppParams out;
  out.d = p.d;
  out.psi.resize(p.d);
  out.q = SquareMatrix(p.d);
  for (int i = 0; i < p.d; ++i) {
    out.psi[i] = p.psi[order[i]];
    for (int j = 0; j < p.d; ++j) out.q(i, j) = p.q(order[i], order[j]);
  }
  return to_param_vector(out);
}

std::optional<ReparamPoint> to_reparam(std::span<const double> theta) {
  if (theta.size() != 4) {
    throw std::invalid_argument("to_reparam: requires a two-state parameter vector");
  }
  const double psi1 = theta[0], psi2 = theta[1], q12 = theta[2], q21 = theta[3];
  if (!(psi1 > 0.0) || !(psi2 > 0.0) || !(q12 > 0.0) || !(q21 > 0.0)) {
    throw std::invalid_argument("to_reparam: all components must be positive");
  }
  if (psi2 < psi1) {
    throw std::invalid_argument("to_reparam: expects canonical order psi1 <= psi2");
  }
  if (psi1 == psi2) return std::nullopt;  // map is singular here

  ReparamPoint p;
  p.q = q12 + q21;
  const double nu1 = q21 / p.q;
  const double nu2 = q12 / p.q;
  p.psi_bar = nu1 * psi1 + nu2 * psi2;
  const double delta = (psi2 - psi1) / p.psi_bar;
  p.alpha = 2.0 * delta * std::sqrt(nu1 * nu2);
  p.beta = delta * (nu2 - nu1);
  return p;
}

std::optional<std::vector<double>> from_reparam(const ReparamPoint& p) {
  if (!(p.alpha > 0.0)) {
    throw std::invalid_argument("from_reparam: alpha must be positive");
  }
  if (!(p.psi_bar > 0.0) || !(p.q > 0.0)) {
    throw std::invalid_argument("from_reparam: psi_bar and q must be positive");
  }
  const double delta = std::hypot(p.alpha, p.beta);
  const double nu1 = 0.5 * (1.0 - p.beta / delta);
  const double nu2 = 1.0 - nu1;
  if (!(nu1 > 0.0) || !(nu1 < 1.0)) return std::nullopt;
  const double psi1 = p.psi_bar * (1.0 - nu2 * delta);
  if (!(psi1 > 0.0)) return std::nullopt;
  const double psi2 = p.psi_bar * (1.0 + nu1 * delta);
  return std::vector<double>{psi1, psi2, nu2 * p.q, nu1 * p.q};
}

double reparam_log_jacobian(const ReparamPoint& p) {
  return std::log(p.psi_bar) + std::log(p.q) + std::log(p.alpha) -
         std::log(2.0 * (p.alpha * p.alpha + p.beta * p.beta));
}

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_events_file(const std::string& path, const EventData& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# t_obs=" << format_double(data.t_obs) << "\n";
  for (double e : data.events) out << format_double(e) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

EventData read_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open events file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# t_obs=", 0) != 0) {
    throw std::runtime_error("events file missing '# t_obs=' header: " + path);
  }
  const double t_obs = std::stod(line.substr(8));
  std::vector<double> events;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    events.push_back(std::stod(line));
  }
  return EventData::from_events(t_obs, std::move(events));
}

void write_trajectory_file(const std::string& path, std::span<const StateJump> jumps) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& j : jumps) out << format_double(j.time) << " " << j.state + 1 << "\n";
}

}  // namespace rwmlab
