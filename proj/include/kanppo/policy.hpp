#pragma once

#include <span>
#include <vector>

#include "kanppo/network.hpp"
#include "kanppo/rng.hpp"

namespace kanppo {

/// One stochastic draw from the policy. log_prob is the density of the
/// pre-clamp action; the environment only ever sees clamped_action.
struct ActionSample {
  std::vector<double> action;          // pre-clamp
  std::vector<double> clamped_action;  // within [low, high]
  double log_prob = 0.0;
};

/// action = mean(obs) + exp(log_std) * z with z ~ N(0, I).
/// Throws NumericError if the actor emits a non-finite mean.
ActionSample sample_action(const ActorCritic& net, Workspace& ws,
                           std::span<const double> obs, std::span<const double> low,
                           std::span<const double> high, Rng& rng);

/// Log-density of `action` under the current policy at `obs`. Leaves the
/// actor forward cache in ws so log_prob_backward can reuse it.
double log_prob(const ActorCritic& net, Workspace& ws, std::span<const double> obs,
                std::span<const double> action);

/// Accumulates d(dl_dlogp * log_prob)/dtheta into net gradients (actor stack
/// and log_std). Must follow a log_prob() call on the same obs/workspace.
void log_prob_backward(ActorCritic& net, Workspace& ws, std::span<const double> action,
                       double dl_dlogp);

/// Differential entropy: sum_d (0.5*ln(2*pi*e) + log_std_d). State-independent.
double entropy(const ActorCritic& net);

/// d(dl_dH * entropy)/dlog_std = dl_dH per dimension.
void entropy_backward(ActorCritic& net, double dl_dh);

/// clamp(mean(obs)) with no RNG use; the evaluation-time policy.
void deterministic_action(const ActorCritic& net, Workspace& ws,
                          std::span<const double> obs, std::span<const double> low,
                          std::span<const double> high, std::span<double> out);

}  // namespace kanppo
