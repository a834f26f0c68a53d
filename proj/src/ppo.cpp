#include "kanppo/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "kanppo/errors.hpp"

namespace kanppo {

void PpoConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("ppo: epsilon must be > 0");
  if (epochs < 1) throw ConfigError("ppo: epochs must be >= 1");
  if (minibatch < 1) throw ConfigError("ppo: minibatch must be >= 1");
  if (horizon < 1) throw ConfigError("ppo: horizon must be >= 1");
  if (minibatch > horizon) throw ConfigError("ppo: minibatch cannot exceed horizon");
  if (total_steps < 1) throw ConfigError("ppo: total_steps must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must be in [0,1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("ppo: lambda must be in [0,1]");
  if (!(lr > 0.0)) throw ConfigError("ppo: lr must be > 0");
  if (eval_episodes < 1) throw ConfigError("ppo: eval_episodes must be >= 1");
  if (max_grad_norm < 0.0) throw ConfigError("ppo: max_grad_norm must be >= 0");
}

double ratio(double logp_new, double logp_old) {
  const double d = std::clamp(logp_new - logp_old, -20.0, 20.0);
  return std::exp(d);
}

double clip_objective(double r, double adv, double epsilon) {
  const double clipped = std::clamp(r, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(r * adv, clipped * adv);
}

double l_pg(std::span<const double> logp, std::span<const double> adv) {
  if (logp.size() != adv.size() || logp.empty()) {
    throw ConfigError("l_pg: mismatched or empty batch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < logp.size(); ++i) acc += logp[i] * adv[i];
  return acc / static_cast<double>(logp.size());
}

LossReport combined_loss(ActorCritic& net, Workspace& ws, const RolloutBuffer& buffer,
                         const AdvantageBatch& batch, std::span<const int> idx,
                         const PpoConfig& cfg, bool with_grad) {
  if (idx.empty()) throw ConfigError("combined_loss: empty minibatch");
  const double inv_b = 1.0 / static_cast<double>(idx.size());

  double clip_acc = 0.0, vf_acc = 0.0, kl_acc = 0.0;
  int clipped_count = 0;

  for (int i : idx) {
    const std::span<const double> obs = buffer.obs_at(i);
    const std::span<const double> act = buffer.action_at(i);
    const double logp_old = buffer.log_probs[i];
    const double adv = batch.advantages[i];

    const double logp_new = log_prob(net, ws, obs, act);
    const double r = ratio(logp_new, logp_old);
    const double r_clipped = std::clamp(r, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
    const double unclipped = r * adv;
    const double clipped = r_clipped * adv;
    clip_acc += std::min(unclipped, clipped);
    kl_acc += logp_old - logp_new;
    if (std::abs(r - 1.0) > cfg.epsilon) ++clipped_count;

    if (with_grad) {
      // Gradient flows only through the branch min() selected, and dies when
      // that branch is flat in r (outside the clip interval) or when the
      // ratio exponent clamp engaged.
      const double delta = logp_new - logp_old;
      const bool exp_live = delta > -20.0 && delta < 20.0;
      const double dobj_dr = (unclipped <= clipped) ? adv : 0.0;
      const double dl_dlogp = -inv_b * dobj_dr * (exp_live ? r : 0.0);
      if (dl_dlogp != 0.0) log_prob_backward(net, ws, act, dl_dlogp);
    }

    const double v = critic_value(net, ws, obs);
    const double verr = v - batch.returns[i];
    vf_acc += verr * verr;
    if (with_grad && cfg.c1 != 0.0) {
      ws.dvout[0] = cfg.c1 * 2.0 * verr * inv_b;
      stack_backward(net.critic, net.params, ws.critic, ws.dvout, {});
    }
  }

  LossReport rep;
  rep.l_clip = clip_acc * inv_b;
  rep.l_vf = vf_acc * inv_b;
  rep.entropy = entropy(net);
  rep.approx_kl = kl_acc * inv_b;
  rep.clip_fraction = clipped_count * inv_b;
  rep.total_loss = -rep.l_clip + cfg.c1 * rep.l_vf - cfg.c2 * rep.entropy;
  if (with_grad && cfg.c2 != 0.0) entropy_backward(net, -cfg.c2);

  if (!std::isfinite(rep.total_loss)) {
    throw NumericError("combined_loss non-finite: l_clip=" + std::to_string(rep.l_clip) +
                       " l_vf=" + std::to_string(rep.l_vf) +
                       " entropy=" + std::to_string(rep.entropy));
  }
  return rep;
}

namespace {

void clamp_log_std(ActorCritic& net) {
  for (double& v : net.log_std_mut()) v = std::clamp(v, -5.0, 2.0);
}

}  // namespace

std::vector<LossReport> ppo_update(ActorCritic& net, Workspace& ws,
                                   const RolloutBuffer& buffer, const PpoConfig& cfg,
                                   AdamState& opt, Rng& rng) {
  if (!buffer.full()) throw ConfigError("ppo_update: buffer not full");
  AdvantageBatch batch = compute_gae(buffer, cfg.gamma, cfg.lambda);
  if (cfg.normalize_adv) normalize_advantages(batch);

  std::vector<LossReport> reports;
  reports.reserve(static_cast<std::size_t>(cfg.epochs) *
                  ((buffer.size + cfg.minibatch - 1) / cfg.minibatch));
  for (int k = 0; k < cfg.epochs; ++k) {
    for (const auto& idx : minibatch_epoch(buffer.size, cfg.minibatch, rng)) {
      zero_grads(net.params);
      reports.push_back(combined_loss(net, ws, buffer, batch, idx, cfg, true));
      if (cfg.max_grad_norm > 0.0) clip_grad_norm(net.params, cfg.max_grad_norm);
      adam_step(net.params, opt);
      clamp_log_std(net);
    }
  }
  return reports;
}

TrainResult train(Env& env, ActorCritic& net, ObsNormalizer& norm, const PpoConfig& cfg,
                  std::uint64_t seed, Rng& rng, const MetricsSink& sink) {
  cfg.validate();
  const EnvDescriptor& desc = env.descriptor();
  if (desc.obs_dim != net.obs_dim || desc.act_dim != net.act_dim) {
    throw ConfigError("train: env/network dimension mismatch");
  }

  RolloutBuffer buffer = RolloutBuffer::make(cfg.horizon, net.obs_dim, net.act_dim);
  Workspace ws = make_workspace(net);
  AdamState opt = AdamState::make(net.params.size(), cfg.lr);

  std::vector<double> obs_raw(desc.obs_dim);
  std::vector<double> x(desc.obs_dim);
  std::vector<double> x_boot(desc.obs_dim);
  {
    const auto first = env.reset();
    std::copy(first.begin(), first.end(), obs_raw.begin());
  }
  norm.update(obs_raw);

  // Returns of the last 10 completed episodes (ring buffer).
  double recent[10];
  int recent_n = 0, recent_head = 0;
  double episode_return = 0.0;

  TrainResult result;
  while (result.env_steps < cfg.total_steps) {
    const auto t0 = std::chrono::steady_clock::now();
    buffer.clear();
    for (int t = 0; t < cfg.horizon; ++t) {
      norm.unit(obs_raw, x);
      const double value = critic_value(net, ws, x);
      ActionSample s = sample_action(net, ws, x, desc.action_low, desc.action_high, rng);
      const StepResult sr = env.step(s.clamped_action);
      episode_return += sr.reward;
      buffer.push(x, s.action, sr.reward, sr.terminated, sr.truncated, value, s.log_prob);

      if (t == cfg.horizon - 1) {
        // Value of the observation after the last stored step; GAE masks it
        // out when that step terminated.
        norm.unit(sr.obs, x_boot);
        buffer.bootstrap_value = critic_value(net, ws, x_boot);
      }
      if (sr.terminated || sr.truncated) {
        recent[recent_head] = episode_return;
        recent_head = (recent_head + 1) % 10;
        if (recent_n < 10) ++recent_n;
        episode_return = 0.0;
        const auto next = env.reset();
        std::copy(next.begin(), next.end(), obs_raw.begin());
      } else {
        std::copy(sr.obs.begin(), sr.obs.end(), obs_raw.begin());
      }
      norm.update(obs_raw);
    }
    result.env_steps += cfg.horizon;

    const std::vector<LossReport> reports = ppo_update(net, ws, buffer, cfg, opt, rng);

    MetricsRow row;
    row.seed = seed;
    row.env_step = result.env_steps;
    if (recent_n > 0) {
      double acc = 0.0;
      for (int i = 0; i < recent_n; ++i) acc += recent[i];
      row.mean_return = acc / recent_n;
    }
    for (const auto& r : reports) {
      row.l_clip += r.l_clip;
      row.l_vf += r.l_vf;
      row.entropy += r.entropy;
      row.approx_kl += r.approx_kl;
      row.clip_fraction += r.clip_fraction;
    }
    if (!reports.empty()) {
      const double inv = 1.0 / static_cast<double>(reports.size());
      row.l_clip *= inv;
      row.l_vf *= inv;
      row.entropy *= inv;
      row.approx_kl *= inv;
      row.clip_fraction *= inv;
    }
    if (cfg.walltime) {
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    result.metrics.push_back(row);
    if (sink) sink(row);
  }
  return result;
}

EvalReport evaluate(const ActorCritic& net, const ObsNormalizer& norm, Env& env,
                    int episodes, std::uint64_t eval_seed) {
  if (episodes < 1) throw ConfigError("evaluate: episodes must be >= 1");
  if (!norm.frozen()) throw ConfigError("evaluate: normalizer must be frozen");
  const EnvDescriptor& desc = env.descriptor();

  Workspace ws = make_workspace(net);
  std::vector<double> x(desc.obs_dim);
  std::vector<double> action(desc.act_dim);
  std::vector<double> returns;
  returns.reserve(episodes);

  for (int e = 0; e < episodes; ++e) {
    std::uint64_t mix = eval_seed;
    Rng::splitmix64(mix);
    mix ^= static_cast<std::uint64_t>(e) * 0x9e3779b97f4a7c15ULL;
    auto obs = env.reset(Rng::splitmix64(mix));
    double ret = 0.0;
    while (true) {
      norm.unit(obs, x);
      deterministic_action(net, ws, x, desc.action_low, desc.action_high, action);
      const StepResult sr = env.step(action);
      ret += sr.reward;
      if (sr.terminated || sr.truncated) break;
      obs = sr.obs;
    }
    returns.push_back(ret);
  }

  EvalReport rep;
  rep.episodes = episodes;
  for (double r : returns) rep.mean_return += r;
  rep.mean_return /= episodes;
  for (double r : returns) {
    rep.std_return += (r - rep.mean_return) * (r - rep.mean_return);
  }
  rep.std_return = std::sqrt(rep.std_return / episodes);
  return rep;
}

}  // namespace kanppo
