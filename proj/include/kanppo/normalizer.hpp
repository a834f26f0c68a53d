#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace kanppo {

/// Welford running mean/variance per observation dimension with clipped
/// z-score output. unit() additionally rescales by 1/clip so every network
/// input lands in [-1, 1], the anchored domain of the spline grids. A
/// disabled normalizer passes observations through unchanged (clamped to
/// [-clip, clip] by normalize(); unit() clamps to [-1, 1]) for tasks whose
/// raw observations are already grid-ranged.
class ObsNormalizer {
 public:
  ObsNormalizer() = default;
  explicit ObsNormalizer(int dim, double clip = 5.0, bool enabled = true)
      : mean_(dim, 0.0), m2_(dim, 0.0), clip_(clip), enabled_(enabled) {}

  int dim() const { return static_cast<int>(mean_.size()); }
  double clip() const { return clip_; }
  std::uint64_t count() const { return count_; }
  bool frozen() const { return frozen_; }
  bool enabled() const { return enabled_; }
  void freeze() { frozen_ = true; }
  void unfreeze() { frozen_ = false; }

  void update(std::span<const double> x) {
    if (frozen_ || !enabled_) return;
    ++count_;
    for (std::size_t d = 0; d < mean_.size(); ++d) {
      const double delta = x[d] - mean_[d];
      mean_[d] += delta / static_cast<double>(count_);
      m2_[d] += delta * (x[d] - mean_[d]);
    }
  }

  double mean(int d) const { return mean_[d]; }
  double variance(int d) const {
    return count_ > 0 ? m2_[d] / static_cast<double>(count_) : 1.0;
  }

  /// clip((x - mean) / sqrt(var + 1e-8), +-clip); identity-with-clamp when
  /// disabled.
  void normalize(std::span<const double> x, std::span<double> out) const {
    for (std::size_t d = 0; d < mean_.size(); ++d) {
      const double z =
          enabled_ ? (x[d] - mean_[d]) / std::sqrt(variance(static_cast<int>(d)) + 1e-8)
                   : x[d];
      out[d] = z > clip_ ? clip_ : (z < -clip_ ? -clip_ : z);
    }
  }

  /// Network-input view: normalize() scaled into [-1, 1] when enabled, raw
  /// observations clamped to [-1, 1] when disabled.
  void unit(std::span<const double> x, std::span<double> out) const {
    if (!enabled_) {
      for (std::size_t d = 0; d < mean_.size(); ++d) {
        out[d] = x[d] > 1.0 ? 1.0 : (x[d] < -1.0 ? -1.0 : x[d]);
      }
      return;
    }
    normalize(x, out);
    for (double& v : out) v /= clip_;
  }

  // Checkpoint plumbing: raw state access.
  const std::vector<double>& mean_vec() const { return mean_; }
  const std::vector<double>& m2_vec() const { return m2_; }
  void restore(std::vector<double> mean, std::vector<double> m2, std::uint64_t count,
               double clip, bool frozen, bool enabled) {
    mean_ = std::move(mean);
    m2_ = std::move(m2);
    count_ = count;
    clip_ = clip;
    frozen_ = frozen;
    enabled_ = enabled;
  }

 private:
  std::vector<double> mean_;
  std::vector<double> m2_;
  std::uint64_t count_ = 0;
  double clip_ = 5.0;
  bool frozen_ = false;
  bool enabled_ = true;
};

}  // namespace kanppo
