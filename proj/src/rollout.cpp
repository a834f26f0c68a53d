#include "kanppo/rollout.hpp"

#include <cmath>
#include <numeric>

#include "kanppo/errors.hpp"

namespace kanppo {

RolloutBuffer RolloutBuffer::make(int horizon, int obs_dim, int act_dim) {
  if (horizon < 1 || obs_dim < 1 || act_dim < 1) {
    throw ConfigError("RolloutBuffer: horizon and dims must be >= 1");
  }
  RolloutBuffer b;
  b.horizon = horizon;
  b.obs_dim = obs_dim;
  b.act_dim = act_dim;
  b.obs.reserve(static_cast<std::size_t>(horizon) * obs_dim);
  b.actions.reserve(static_cast<std::size_t>(horizon) * act_dim);
  b.rewards.reserve(horizon);
  b.terminated.reserve(horizon);
  b.truncated.reserve(horizon);
  b.values.reserve(horizon);
  b.log_probs.reserve(horizon);
  return b;
}

void RolloutBuffer::clear() {
  obs.clear();
  actions.clear();
  rewards.clear();
  terminated.clear();
  truncated.clear();
  values.clear();
  log_probs.clear();
  bootstrap_value = 0.0;
  size = 0;
}

void RolloutBuffer::push(std::span<const double> o, std::span<const double> a,
                         double reward, bool term, bool trunc, double value,
                         double log_prob) {
  if (full()) throw ConfigError("RolloutBuffer: push on full buffer");
  if (term && trunc) throw ConfigError("RolloutBuffer: step both terminated and truncated");
  if (!std::isfinite(reward)) throw NumericError("RolloutBuffer: non-finite reward");
  obs.insert(obs.end(), o.begin(), o.end());
  actions.insert(actions.end(), a.begin(), a.end());
  rewards.push_back(reward);
  terminated.push_back(term ? 1 : 0);
  truncated.push_back(trunc ? 1 : 0);
  values.push_back(value);
  log_probs.push_back(log_prob);
  ++size;
}

double td_error(double r_t, double v_t, double v_next, bool terminal, double gamma) {
  return r_t + gamma * v_next * (terminal ? 0.0 : 1.0) - v_t;
}

AdvantageBatch compute_gae(const RolloutBuffer& buffer, double gamma, double lambda) {
  if (buffer.size == 0) throw ConfigError("compute_gae: empty buffer");
  const int T = buffer.size;
  AdvantageBatch batch;
  batch.gamma = gamma;
  batch.lambda = lambda;
  batch.advantages.resize(T);
  batch.returns.resize(T);
  double next_adv = 0.0;
  for (int t = T - 1; t >= 0; --t) {
    const bool term = buffer.terminated[t] != 0;
    const double v_next = (t == T - 1) ? buffer.bootstrap_value : buffer.values[t + 1];
    const double delta = td_error(buffer.rewards[t], buffer.values[t], v_next, term, gamma);
    next_adv = delta + gamma * lambda * (term ? 0.0 : 1.0) * next_adv;
    batch.advantages[t] = next_adv;
    batch.returns[t] = next_adv + buffer.values[t];
  }
  return batch;
}

void normalize_advantages(AdvantageBatch& batch) {
  const std::size_t n = batch.advantages.size();
  if (n < 2) throw ConfigError("normalize_advantages: need at least 2 samples");
  const double mean =
      std::accumulate(batch.advantages.begin(), batch.advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : batch.advantages) var += (a - mean) * (a - mean);
  var /= n;
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : batch.advantages) a = (a - mean) * inv;
}

std::vector<std::vector<int>> minibatch_epoch(int T, int M, Rng& rng) {
  if (M < 1 || M > T) throw ConfigError("minibatch_epoch: need 1 <= M <= T");
  std::vector<int> perm(T);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  std::vector<std::vector<int>> batches;
  batches.reserve((T + M - 1) / M);
  for (int start = 0; start < T; start += M) {
    const int end = std::min(start + M, T);
    batches.emplace_back(perm.begin() + start, perm.begin() + end);
  }
  return batches;
}

}  // namespace kanppo
