#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kanppo/rng.hpp"

namespace kanppo {

struct EnvDescriptor {
  std::string name;
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  int max_episode_steps = 0;
};

/// obs spans point into the environment's internal buffer and stay valid
/// until the next reset()/step() call.
struct StepResult {
  std::span<const double> obs;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvDescriptor& descriptor() const = 0;
  /// Reseeds the env's internal RNG, then starts a fresh episode.
  virtual std::span<const double> reset(std::uint64_t seed) = 0;
  /// Starts a fresh episode continuing the internal RNG stream.
  virtual std::span<const double> reset() = 0;
  /// Action must already be clamped to bounds; out-of-bounds throws
  /// ConfigError. truncated is set exactly when the step counter hits
  /// max_episode_steps without termination.
  virtual StepResult step(std::span<const double> action) = 0;
};

/// Registry keyed by "point-reacher", "pendulum-swingup",
/// "cartpole-continuous". Unknown name throws ConfigError.
std::unique_ptr<Env> make_env(const std::string& name, std::uint64_t seed);
const std::vector<std::string>& env_names();

/// Dimension pairs used only for parameter-count tables (no dynamics).
struct DimsEntry {
  std::string name;
  int obs_dim;
  int act_dim;
};
const std::vector<DimsEntry>& param_table_dims();

struct BaselineReport {
  double mean_return = 0.0;
  double std_return = 0.0;
  int episodes = 0;
};

/// Mean undiscounted return of uniform-random actions over full episodes.
BaselineReport random_policy_baseline(Env& env, int episodes, Rng& rng);

}  // namespace kanppo
