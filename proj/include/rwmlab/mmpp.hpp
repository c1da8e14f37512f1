#ifndef RWMLAB_MMPP_HPP
#define RWMLAB_MMPP_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwmlab/matrix.hpp"

namespace rwmlab {

/// Log-density value standing for "outside the support"; samplers treat it
/// as an automatic rejection.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// A Poisson process whose intensity is driven by an unobserved
/// continuous-time Markov chain: d hidden states, intensity psi[i] while the
/// chain sits in state i, generator q.
struct MmppParams {
  int d = 0;
  std::vector<double> psi;
  SquareMatrix q;

  /// Throws std::invalid_argument if psi has negatives, q is not a
  /// conservative generator, or sizes disagree.
  void validate() const;
};

/// Flat parameter order used by the samplers: psi_1..psi_d, then the
/// off-diagonal generator rates row-major (q_12, q_13, ..., q_21, ...).
/// Length is d + d(d-1) = d^2.
std::vector<double> to_param_vector(const MmppParams& p);
MmppParams from_param_vector(std::span<const double> theta);

/// Number of hidden states implied by a flat parameter vector.
int states_from_param_dim(std::size_t len);

/// Observed event times on a window [0, t_obs], with the derived inter-event
/// gaps t_1..t_{n+1} (first gap from the window start, last to the window
/// end).
struct EventData {
  double t_obs = 0.0;
  std::vector<double> events;
  std::vector<double> gaps;

  /// Validates (strictly increasing events in (0, t_obs]) and derives gaps.
  static EventData from_events(double t_obs, std::vector<double> events);

  std::size_t count() const { return events.size(); }
};

/// Independent exponential priors, one mean per flat parameter.
struct PriorSpec {
  std::vector<double> means;
};

/// One jump of the hidden chain.
struct StateJump {
  double time;
  int state;
};

/// Simulates the hidden chain (holding times + embedded jumps, started from
/// the stationary distribution) and the modulated events on [0, t_obs].
/// Deterministic for a fixed seed. Optionally records the hidden trajectory.
EventData simulate(const MmppParams& params, double t_obs, std::uint64_t seed,
                   std::vector<StateJump>* trajectory = nullptr);

/// Log-likelihood of the event data, propagating a row vector through
/// exp((Q - Psi) t_i) * Psi per event with per-step renormalization so long
/// records neither underflow nor overflow. The initial distribution is the
/// stationary distribution of q. Invalid parameters yield kLogZero.
double log_likelihood(const MmppParams& params, const EventData& data);

/// Same, with the initial distribution pinned explicitly.
double log_likelihood(const MmppParams& params, const EventData& data,
                      const ProbVector& nu);

/// Log-likelihood plus independent exponential log-priors. Any
/// non-positive component puts theta outside the support (kLogZero).
/// Throws std::invalid_argument on a length mismatch.
double log_posterior(std::span<const double> theta, const EventData& data,
                     const PriorSpec& prior);

/// Relabels hidden states so intensities are ascending; generator rates are
/// permuted consistently. Leaves the posterior value unchanged.
std::vector<double> canonicalize(std::span<const double> theta);

/// Orthogonalized coordinates for the two-state process: mean stationary
/// intensity psi_bar, total switching rate q, and the asymmetry pair
/// (alpha, beta) with alpha = 2*delta*sqrt(nu1*nu2), beta = delta*(nu2-nu1),
/// delta = (psi2-psi1)/psi_bar.
struct ReparamPoint {
  double psi_bar;
  double q;
  double alpha;
  double beta;
};

/// Forward map for canonical two-state parameters (psi1 < psi2, all
/// positive). Returns nullopt at the degenerate point psi1 == psi2 where the
/// map is singular. Throws std::invalid_argument for non-positive input or
/// d != 2.
std::optional<ReparamPoint> to_reparam(std::span<const double> theta);

/// Inverse map. Returns nullopt when the point falls outside the original
/// support (psi1 <= 0). Throws std::invalid_argument unless alpha, psi_bar,
/// q are all positive.
std::optional<std::vector<double>> from_reparam(const ReparamPoint& p);

/// log |det d(psi1,psi2,q12,q21)/d(psi_bar,q,alpha,beta)|
///   = log(psi_bar * q * alpha / (2 (alpha^2 + beta^2))).
double reparam_log_jacobian(const ReparamPoint& p);

/// Events file: "# t_obs=<value>" header line, then one ascending event time
/// per line.
void write_events_file(const std::string& path, const EventData& data);
EventData read_events_file(const std::string& path);

/// Hidden-trajectory sidecar: "<time> <state>" per jump.
void write_trajectory_file(const std::string& path, std::span<const StateJump> jumps);

}  // namespace rwmlab

#endif  // RWMLAB_MMPP_HPP
