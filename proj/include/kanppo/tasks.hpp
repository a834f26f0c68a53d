#pragma once

#include <array>

#include "kanppo/env.hpp"

namespace kanppo {

/// 2-D point mass pushed by bounded forces toward a per-episode goal.
/// obs = [pos, vel, goal - pos]; reward = -|pos - goal| - 0.01*|a|^2, with a
/// +10 bonus when a step first brings the mass within the goal radius.
class PointReacher final : public Env {
 public:
  explicit PointReacher(std::uint64_t seed);
  const EnvDescriptor& descriptor() const override { return desc_; }
  std::span<const double> reset(std::uint64_t seed) override;
  std::span<const double> reset() override;
  StepResult step(std::span<const double> action) override;

  /// Test hook: place the mass/goal exactly (step counter untouched).
  void set_state(std::array<double, 2> pos, std::array<double, 2> vel,
                 std::array<double, 2> goal);

  static constexpr double kDt = 0.05;
  static constexpr double kFriction = 0.95;
  static constexpr double kGoalRadius = 0.05;
  static constexpr double kGoalBonus = 10.0;

 private:
  void write_obs();
  EnvDescriptor desc_;
  Rng rng_;
  std::array<double, 2> pos_{}, vel_{}, goal_{};
  std::array<double, 6> obs_{};
  int steps_ = 0;
};

/// Torque-limited pendulum swing-up, theta = 0 upright.
/// theta_dd = (3g/2l) sin(theta) + 3a/(m l^2); cost on the pre-step state.
class PendulumSwingup final : public Env {
 public:
  explicit PendulumSwingup(std::uint64_t seed);
  const EnvDescriptor& descriptor() const override { return desc_; }
  std::span<const double> reset(std::uint64_t seed) override;
  std::span<const double> reset() override;
  StepResult step(std::span<const double> action) override;

  void set_state(double theta, double theta_dot);
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }

  static constexpr double kDt = 0.05;
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kMaxSpeed = 8.0;

 private:
  void write_obs();
  EnvDescriptor desc_;
  Rng rng_;
  double theta_ = 0.0, theta_dot_ = 0.0;
  std::array<double, 3> obs_{};
  int steps_ = 0;
};

/// Classic cart-pole with a continuous force, +1 reward per step, failure on
/// |theta| > 12 deg or |x| > 2.4.
class CartPoleContinuous final : public Env {
 public:
  explicit CartPoleContinuous(std::uint64_t seed);
  const EnvDescriptor& descriptor() const override { return desc_; }
  std::span<const double> reset(std::uint64_t seed) override;
  std::span<const double> reset() override;
  StepResult step(std::span<const double> action) override;

  void set_state(double x, double x_dot, double theta, double theta_dot);

  static constexpr double kDt = 0.05;
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kPoleHalfLength = 0.5;
  static constexpr double kThetaLimit = 12.0 * 3.14159265358979323846 / 180.0;
  static constexpr double kXLimit = 2.4;

 private:
  void write_obs();
  EnvDescriptor desc_;
  Rng rng_;
  std::array<double, 4> state_{};  // x, x_dot, theta, theta_dot
  std::array<double, 4> obs_{};
  int steps_ = 0;
};

/// ((theta + pi) mod 2pi) - pi
double wrap_angle(double theta);

}  // namespace kanppo
