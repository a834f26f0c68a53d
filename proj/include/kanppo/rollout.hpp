#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kanppo/rng.hpp"

namespace kanppo {

/// Fixed-capacity on-policy trajectory store, struct-of-arrays. Observations
/// are stored exactly as fed to the networks (already normalized); actions are
/// the pre-clamp samples whose log-probs were recorded.
struct RolloutBuffer {
  int horizon = 0;
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<double> obs;        // horizon * obs_dim
  std::vector<double> actions;    // horizon * act_dim
  std::vector<double> rewards;
  std::vector<std::uint8_t> terminated;
  std::vector<std::uint8_t> truncated;
  std::vector<double> values;     // V(s_t) at collection time
  std::vector<double> log_probs;  // log pi_old(a_t | s_t)
  double bootstrap_value = 0.0;   // V(s_T) for a truncated tail
  int size = 0;

  static RolloutBuffer make(int horizon, int obs_dim, int act_dim);
  void clear();
  bool full() const { return size == horizon; }
  /// Appends one transition; throws ConfigError when already full or when a
  /// step claims to be both terminated and truncated.
  void push(std::span<const double> o, std::span<const double> a, double reward,
            bool term, bool trunc, double value, double log_prob);

  std::span<const double> obs_at(int t) const {
    return {obs.data() + static_cast<std::size_t>(t) * obs_dim,
            static_cast<std::size_t>(obs_dim)};
  }
  std::span<const double> action_at(int t) const {
    return {actions.data() + static_cast<std::size_t>(t) * act_dim,
            static_cast<std::size_t>(act_dim)};
  }
};

struct AdvantageBatch {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantage + value = V_target
  double gamma = 0.99;
  double lambda = 0.95;
};

/// delta_t = r_t + gamma * v_next * (1 - terminal) - v_t
double td_error(double r_t, double v_t, double v_next, bool terminal, double gamma);

/// Backward GAE recursion A_t = delta_t + gamma*lambda*(1 - terminated_t)*A_{t+1}
/// over a full buffer. v_next at the buffer edge comes from bootstrap_value;
/// termination zeroes both the bootstrap and the recursion tail.
AdvantageBatch compute_gae(const RolloutBuffer& buffer, double gamma, double lambda);

/// Standardizes advantages to mean 0 / std 1 (population std, +1e-8 in the
/// denominator); returns are left untouched. Constant advantages become zeros.
void normalize_advantages(AdvantageBatch& batch);

/// One epoch of minibatch indices: a fresh shuffled permutation of 0..T-1 cut
/// into ceil(T/M) batches. Every index appears exactly once. Throws
/// ConfigError unless 1 <= M <= T.
std::vector<std::vector<int>> minibatch_epoch(int T, int M, Rng& rng);

}  // namespace kanppo
