#include "kanppo/grad_check.hpp"

#include <cmath>
#include <vector>

#include "kanppo/adam.hpp"
#include "kanppo/errors.hpp"

namespace kanppo {

double finite_diff_check(ParamStore& params,
                         const std::function<double(bool)>& loss_fn,
                         double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_check: h must be > 0");

  zero_grads(params);
  const double base = loss_fn(true);
  if (!std::isfinite(base)) throw NumericError("finite_diff_check: non-finite loss");
  const std::vector<double> analytic(params.grads().begin(), params.grads().end());

  auto v = params.values();
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = v[i];
    v[i] = orig + h;
    const double up = loss_fn(false);
    v[i] = orig - h;
    const double down = loss_fn(false);
    v[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff_check: non-finite loss at perturbed point");
    }
    const double central = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[i] - central) / std::max(1.0, std::abs(central));
    if (err > worst) worst = err;
  }
  return worst;
}

}  // namespace kanppo
