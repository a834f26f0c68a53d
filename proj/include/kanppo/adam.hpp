#pragma once

#include <cstdint>
#include <vector>

#include "kanppo/param_store.hpp"

namespace kanppo {

/// Adam moment buffers for one ParamStore. t counts completed steps.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState make(std::size_t n, double lr = 3e-4) {
    AdamState s;
    s.m.assign(n, 0.0);
    s.v.assign(n, 0.0);
    s.lr = lr;
    return s;
  }
};

/// One bias-corrected Adam step over all parameters, in place. Gradients are
/// left untouched (the caller zeroes them). Throws NumericError naming the
/// offending slice if any gradient is non-finite.
void adam_step(ParamStore& params, AdamState& state);

/// Sets every gradient to exactly 0.0.
void zero_grads(ParamStore& params);

/// L2 norm of the full gradient vector.
double global_grad_norm(const ParamStore& params);

/// Scales gradients so their global norm is at most max_norm (no-op if
/// already within). Returns the pre-clip norm.
double clip_grad_norm(ParamStore& params, double max_norm);

}  // namespace kanppo
