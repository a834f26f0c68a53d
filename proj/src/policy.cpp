#include "kanppo/policy.hpp"

#include <algorithm>
#include <cmath>

#include "kanppo/errors.hpp"

namespace kanppo {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         std::span<const double> log_std) {
  double lp = 0.0;
  for (std::size_t d = 0; d < action.size(); ++d) {
    const double z = (action[d] - mean[d]) * std::exp(-log_std[d]);
    lp += -kLogSqrt2Pi - log_std[d] - 0.5 * z * z;
  }
  return lp;
}
}  // namespace

ActionSample sample_action(const ActorCritic& net, Workspace& ws,
                           std::span<const double> obs, std::span<const double> low,
                           std::span<const double> high, Rng& rng) {
  const std::size_t ad = static_cast<std::size_t>(net.act_dim);
  actor_mean(net, ws, obs, ws.mean);
  for (double m : ws.mean) {
    if (!std::isfinite(m)) {
      throw NumericError("sample_action: non-finite action mean from " +
                         std::string(arch_name(net.spec.arch)) + " actor");
    }
  }
  ActionSample s;
  s.action.resize(ad);
  s.clamped_action.resize(ad);
  const std::span<const double> ls = net.log_std();
  for (std::size_t d = 0; d < ad; ++d) {
    const double z = rng.normal();
    s.action[d] = ws.mean[d] + std::exp(ls[d]) * z;
    s.log_prob += -kLogSqrt2Pi - ls[d] - 0.5 * z * z;
    s.clamped_action[d] = std::clamp(s.action[d], low[d], high[d]);
  }
  return s;
}

double log_prob(const ActorCritic& net, Workspace& ws, std::span<const double> obs,
                std::span<const double> action) {
  actor_mean(net, ws, obs, ws.mean);
  return gaussian_log_prob(action, ws.mean, net.log_std());
}

void log_prob_backward(ActorCritic& net, Workspace& ws, std::span<const double> action,
                       double dl_dlogp) {
  // d logp / d mean_d = (a_d - mu_d) / sigma_d^2
  // d logp / d log_std_d = z_d^2 - 1,  z_d = (a_d - mu_d) / sigma_d
  const std::span<const double> ls = net.log_std();
  std::span<double> gls = net.params.grads(net.log_std_slice);
  for (std::size_t d = 0; d < action.size(); ++d) {
    const double inv_sigma = std::exp(-ls[d]);
    const double z = (action[d] - ws.mean[d]) * inv_sigma;
    ws.dmean[d] = dl_dlogp * z * inv_sigma;
    gls[d] += dl_dlogp * (z * z - 1.0);
  }
  stack_backward(net.actor, net.params, ws.actor, ws.dmean, {});
}

double entropy(const ActorCritic& net) {
  // 0.5 * ln(2*pi*e) per dimension plus log_std_d
  constexpr double kHalfLog2PiE = 1.4189385332046727;
  double h = 0.0;
  for (double ls : net.log_std()) h += kHalfLog2PiE + ls;
  return h;
}

void entropy_backward(ActorCritic& net, double dl_dh) {
  for (double& g : net.params.grads(net.log_std_slice)) g += dl_dh;
}

void deterministic_action(const ActorCritic& net, Workspace& ws,
                          std::span<const double> obs, std::span<const double> low,
                          std::span<const double> high, std::span<double> out) {
  actor_mean(net, ws, obs, ws.mean);
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d] = std::clamp(ws.mean[d], low[d], high[d]);
  }
}

}  // namespace kanppo
