#include "kanppo/adam.hpp"

#include <cmath>
#include <string>

#include "kanppo/errors.hpp"

namespace kanppo {

void adam_step(ParamStore& params, AdamState& state) {
  const auto g = params.grads();
  auto v = params.values();
  const std::size_t n = params.size();
  if (state.m.size() != n || state.v.size() != n) {
    throw ConfigError("adam_step: state size does not match parameter store");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(g[i])) {
      throw NumericError("adam_step: non-finite gradient in slice '" +
                         std::string(params.slice_name_at(i)) + "'");
    }
  }
  state.t += 1;
  const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / b1t;
    const double v_hat = state.v[i] / b2t;
    v[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

void zero_grads(ParamStore& params) {
  auto g = params.grads();
  for (auto& x : g) x = 0.0;
}

double global_grad_norm(const ParamStore& params) {
  double acc = 0.0;
  for (double g : params.grads()) acc += g * g;
  return std::sqrt(acc);
}

double clip_grad_norm(ParamStore& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& g : params.grads()) g *= scale;
  }
  return norm;
}

}  // namespace kanppo
