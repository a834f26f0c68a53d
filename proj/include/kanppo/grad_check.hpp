#pragma once

#include <functional>

#include "kanppo/param_store.hpp"

namespace kanppo {

/// Central-difference verification of analytic gradients.
///
/// `loss_fn(true)` must recompute the scalar loss from the current parameter
/// values and accumulate analytic gradients into `params.grads()` (the checker
/// zeroes them first); `loss_fn(false)` must return the same loss without
/// touching gradients. The loss must be deterministic in the parameter values.
///
/// Returns max over parameters of |analytic - central| / max(1, |central|).
/// Throws NumericError if the loss is non-finite at any evaluation point.
double finite_diff_check(ParamStore& params,
                         const std::function<double(bool with_grad)>& loss_fn,
                         double h = 1e-5);

}  // namespace kanppo
