#include "kanppo/tasks.hpp"

#include <cmath>

#include "kanppo/errors.hpp"

namespace kanppo {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_bounds(const EnvDescriptor& d, std::span<const double> action) {
  if (action.size() != static_cast<std::size_t>(d.act_dim)) {
    throw ConfigError(d.name + ": action dim mismatch");
  }
  for (int i = 0; i < d.act_dim; ++i) {
    if (!(action[i] >= d.action_low[i] - 1e-12 && action[i] <= d.action_high[i] + 1e-12)) {
      throw ConfigError(d.name + ": action out of bounds (clamp before stepping)");
    }
  }
}

}  // namespace

double wrap_angle(double theta) {
  double w = std::fmod(theta + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

// ---------------------------------------------------------------- PointReacher

PointReacher::PointReacher(std::uint64_t seed) {
  desc_.name = "point-reacher";
  desc_.obs_dim = 6;
  desc_.act_dim = 2;
  desc_.action_low = {-1.0, -1.0};
  desc_.action_high = {1.0, 1.0};
  desc_.max_episode_steps = 200;
  rng_.reseed(seed);
  reset();
}

void PointReacher::write_obs() {
  obs_[0] = pos_[0];
  obs_[1] = pos_[1];
  obs_[2] = vel_[0];
  obs_[3] = vel_[1];
  obs_[4] = goal_[0] - pos_[0];
  obs_[5] = goal_[1] - pos_[1];
}

std::span<const double> PointReacher::reset(std::uint64_t seed) {
  rng_.reseed(seed);
  return reset();
}

std::span<const double> PointReacher::reset() {
  pos_ = {rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0)};
  vel_ = {0.0, 0.0};
  // Keep the goal outside twice the capture radius so an episode can't end
  // with zero steps taken.
  do {
    goal_ = {rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0)};
  } while (std::hypot(goal_[0] - pos_[0], goal_[1] - pos_[1]) < 2.0 * kGoalRadius);
  steps_ = 0;
  write_obs();
  return obs_;
}

void PointReacher::set_state(std::array<double, 2> pos, std::array<double, 2> vel,
                             std::array<double, 2> goal) {
  pos_ = pos;
  vel_ = vel;
  goal_ = goal;
  write_obs();
}

StepResult PointReacher::step(std::span<const double> action) {
  check_bounds(desc_, action);
  const double prev_dist = std::hypot(pos_[0] - goal_[0], pos_[1] - goal_[1]);
  for (int i = 0; i < 2; ++i) {
    vel_[i] = (vel_[i] + action[i] * kDt) * kFriction;
    pos_[i] += vel_[i] * kDt;
  }
  ++steps_;
  const double dist = std::hypot(pos_[0] - goal_[0], pos_[1] - goal_[1]);
  double reward = -dist - 0.01 * (action[0] * action[0] + action[1] * action[1]);
  const bool reached = dist < kGoalRadius;
  if (reached && prev_dist >= kGoalRadius) reward += kGoalBonus;
  write_obs();
  StepResult r;
  r.obs = obs_;
  r.reward = reward;
  r.terminated = reached;
  r.truncated = !reached && steps_ >= desc_.max_episode_steps;
  return r;
}

// ------------------------------------------------------------ PendulumSwingup

PendulumSwingup::PendulumSwingup(std::uint64_t seed) {
  desc_.name = "pendulum-swingup";
  desc_.obs_dim = 3;
  desc_.act_dim = 1;
  desc_.action_low = {-2.0};
  desc_.action_high = {2.0};
  desc_.max_episode_steps = 200;
  rng_.reseed(seed);
  reset();
}

void PendulumSwingup::write_obs() {
  obs_[0] = std::cos(theta_);
  obs_[1] = std::sin(theta_);
  obs_[2] = theta_dot_ / kMaxSpeed;
}

std::span<const double> PendulumSwingup::reset(std::uint64_t seed) {
  rng_.reseed(seed);
  return reset();
}

std::span<const double> PendulumSwingup::reset() {
  theta_ = rng_.uniform(-kPi, kPi);
  theta_dot_ = rng_.uniform(-1.0, 1.0);
  steps_ = 0;
  write_obs();
  return obs_;
}

void PendulumSwingup::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = theta_dot;
  write_obs();
}

StepResult PendulumSwingup::step(std::span<const double> action) {
  check_bounds(desc_, action);
  const double a = action[0];
  const double w = wrap_angle(theta_);
  const double reward = -(w * w + 0.1 * theta_dot_ * theta_dot_ + 0.001 * a * a);

  const double theta_dd = (3.0 * kGravity / (2.0 * kLength)) * std::sin(theta_) +
                          3.0 * a / (kMass * kLength * kLength);
  theta_dot_ += theta_dd * kDt;
  if (theta_dot_ > kMaxSpeed) theta_dot_ = kMaxSpeed;
  if (theta_dot_ < -kMaxSpeed) theta_dot_ = -kMaxSpeed;
  theta_ += theta_dot_ * kDt;
  ++steps_;
  write_obs();

  StepResult r;
  r.obs = obs_;
  r.reward = reward;
  r.terminated = false;
  r.truncated = steps_ >= desc_.max_episode_steps;
  return r;
}

// --------------------------------------------------------- CartPoleContinuous

CartPoleContinuous::CartPoleContinuous(std::uint64_t seed) {
  desc_.name = "cartpole-continuous";
  desc_.obs_dim = 4;
  desc_.act_dim = 1;
  desc_.action_low = {-10.0};
  desc_.action_high = {10.0};
  desc_.max_episode_steps = 500;
  rng_.reseed(seed);
  reset();
}

void CartPoleContinuous::write_obs() { obs_ = state_; }

std::span<const double> CartPoleContinuous::reset(std::uint64_t seed) {
  rng_.reseed(seed);
  return reset();
}

std::span<const double> CartPoleContinuous::reset() {
  for (double& s : state_) s = rng_.uniform(-0.05, 0.05);
  steps_ = 0;
  write_obs();
  return obs_;
}

void CartPoleContinuous::set_state(double x, double x_dot, double theta, double theta_dot) {
  state_ = {x, x_dot, theta, theta_dot};
  write_obs();
}

StepResult CartPoleContinuous::step(std::span<const double> action) {
  check_bounds(desc_, action);
  const double force = action[0];
  double x = state_[0], x_dot = state_[1], theta = state_[2], theta_dot = state_[3];

  const double total_mass = kMassCart + kMassPole;
  const double pml = kMassPole * kPoleHalfLength;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + pml * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kPoleHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / total_mass));
  const double x_acc = temp - pml * theta_acc * cos_t / total_mass;

  x_dot += x_acc * kDt;
  x += x_dot * kDt;
  theta_dot += theta_acc * kDt;
  theta += theta_dot * kDt;
  state_ = {x, x_dot, theta, theta_dot};
  ++steps_;
  write_obs();

  StepResult r;
  r.obs = obs_;
  r.reward = 1.0;
  r.terminated = std::abs(theta) > kThetaLimit || std::abs(x) > kXLimit;
  r.truncated = !r.terminated && steps_ >= desc_.max_episode_steps;
  return r;
}

// -------------------------------------------------------------------- registry

std::unique_ptr<Env> make_env(const std::string& name, std::uint64_t seed) {
  if (name == "point-reacher") return std::make_unique<PointReacher>(seed);
  if (name == "pendulum-swingup") return std::make_unique<PendulumSwingup>(seed);
  if (name == "cartpole-continuous") return std::make_unique<CartPoleContinuous>(seed);
  throw ConfigError("unknown environment '" + name +
                    "' (expected point-reacher, pendulum-swingup, cartpole-continuous)");
}

const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names = {"point-reacher", "pendulum-swingup",
                                                 "cartpole-continuous"};
  return names;
}

const std::vector<DimsEntry>& param_table_dims() {
  static const std::vector<DimsEntry> dims = {
      {"halfcheetah", 17, 6}, {"hopper", 11, 3},  {"invertedpendulum", 4, 1},
      {"pusher", 23, 7},      {"swimmer", 8, 2},  {"walker2d", 17, 6},
  };
  return dims;
}

BaselineReport random_policy_baseline(Env& env, int episodes, Rng& rng) {
  if (episodes < 1) throw ConfigError("random_policy_baseline: episodes must be >= 1");
  const EnvDescriptor& d = env.descriptor();
  std::vector<double> action(d.act_dim);
  std::vector<double> returns;
  returns.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    env.reset();
    double ret = 0.0;
    while (true) {
      for (int i = 0; i < d.act_dim; ++i) {
        action[i] = rng.uniform(d.action_low[i], d.action_high[i]);
      }
      const StepResult r = env.step(action);
      ret += r.reward;
      if (r.terminated || r.truncated) break;
    }
    returns.push_back(ret);
  }
  BaselineReport rep;
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
