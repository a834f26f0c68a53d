#pragma once

#include <functional>
#include <span>
#include <vector>

#include "kanppo/adam.hpp"
#include "kanppo/env.hpp"
#include "kanppo/metrics.hpp"
#include "kanppo/network.hpp"
#include "kanppo/normalizer.hpp"
#include "kanppo/policy.hpp"
#include "kanppo/rollout.hpp"

namespace kanppo {

struct PpoConfig {
  double epsilon = 0.2;       // clip parameter
  double c1 = 0.5;            // value-loss coefficient
  double c2 = 0.0;            // entropy coefficient
  double lr = 3e-4;
  int epochs = 10;            // K
  int minibatch = 64;         // M
  int horizon = 2048;         // T
  double gamma = 0.99;
  double lambda = 0.95;
  long long total_steps = 100000;
  int eval_episodes = 100;
  bool normalize_adv = true;
  bool normalize_obs = true;   // off feeds raw observations (clamped) to the nets
  double max_grad_norm = 0.0;  // 0 disables clipping; >0 couples actor/critic scales
  bool walltime = false;       // fill wall_seconds (off keeps CSVs bit-identical)

  void validate() const;  // throws ConfigError on any violated invariant
};

struct LossReport {
  double l_clip = 0.0;      // mean clipped surrogate (maximized quantity)
  double l_vf = 0.0;        // mean squared value error
  double entropy = 0.0;
  double total_loss = 0.0;  // -l_clip + c1*l_vf - c2*entropy
  double approx_kl = 0.0;   // mean(logp_old - logp_new)
  double clip_fraction = 0.0;
};

/// exp(logp_new - logp_old) with the exponent clamped to [-20, 20].
double ratio(double logp_new, double logp_old);

/// min(r*adv, clip(r, 1-eps, 1+eps)*adv)
double clip_objective(double r, double adv, double epsilon);

/// Diagnostic vanilla policy-gradient surrogate: mean(logp * adv).
double l_pg(std::span<const double> logp, std::span<const double> adv);

/// Combined PPO loss over the minibatch `idx`, optionally accumulating
/// gradients into net (caller zeroes first). Old log-probs/values come from
/// the buffer; advantages/returns from `batch`. Throws NumericError with a
/// component breakdown if the total is non-finite.
LossReport combined_loss(ActorCritic& net, Workspace& ws, const RolloutBuffer& buffer,
                         const AdvantageBatch& batch, std::span<const int> idx,
                         const PpoConfig& cfg, bool with_grad);

/// K epochs of shuffled minibatch Adam steps over a full buffer. GAE is
/// computed once up front; old log-probs stay frozen. log_std is clamped to
/// [-5, 2] after every step. Returns one LossReport per minibatch.
std::vector<LossReport> ppo_update(ActorCritic& net, Workspace& ws,
                                   const RolloutBuffer& buffer, const PpoConfig& cfg,
                                   AdamState& opt, Rng& rng);

using MetricsSink = std::function<void(const MetricsRow&)>;

struct TrainResult {
  std::vector<MetricsRow> metrics;
  long long env_steps = 0;
};

/// Collect-then-update loop until total_steps. Observations pass through the
/// normalizer (updated online, unit-scaled into [-1,1]) before reaching the
/// networks; the buffer stores exactly what the networks saw. Deterministic
/// given (env state, net init, rng). `seed` only labels metrics rows.
TrainResult train(Env& env, ActorCritic& net, ObsNormalizer& norm, const PpoConfig& cfg,
                  std::uint64_t seed, Rng& rng, const MetricsSink& sink = nullptr);

struct EvalReport {
  double mean_return = 0.0;
  double std_return = 0.0;
  int episodes = 0;
};

/// Deterministic-policy evaluation with a frozen normalizer; episode e runs
/// on env.reset(mix(eval_seed, e)). Consumes no sampling RNG.
EvalReport evaluate(const ActorCritic& net, const ObsNormalizer& norm, Env& env,
                    int episodes, std::uint64_t eval_seed);

}  // namespace kanppo
