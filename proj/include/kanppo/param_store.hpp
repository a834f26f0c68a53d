#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kanppo {

struct ParamSlice {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Flat 64-bit parameter and gradient storage. Slices are appended at build
/// time and are disjoint by construction; values and grads always have equal
/// length. A store is owned by exactly one training run and never shared
/// mutably across threads.
class ParamStore {
 public:
  /// Appends a named slice of `length` zeros; returns its index.
  std::size_t add_slice(std::string name, std::size_t length) {
    ParamSlice s{std::move(name), values_.size(), length};
    values_.resize(values_.size() + length, 0.0);
    grads_.resize(values_.size(), 0.0);
    slices_.push_back(std::move(s));
    return slices_.size() - 1;
  }

  std::size_t size() const { return values_.size(); }
  std::size_t slice_count() const { return slices_.size(); }
  const ParamSlice& slice(std::size_t idx) const { return slices_[idx]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> grads() { return grads_; }
  std::span<const double> grads() const { return grads_; }

  std::span<double> values(std::size_t idx) {
    const auto& s = slices_[idx];
    return {values_.data() + s.offset, s.length};
  }
  std::span<const double> values(std::size_t idx) const {
    const auto& s = slices_[idx];
    return {values_.data() + s.offset, s.length};
  }
  std::span<double> grads(std::size_t idx) {
    const auto& s = slices_[idx];
    return {grads_.data() + s.offset, s.length};
  }
  std::span<const double> grads(std::size_t idx) const {
    const auto& s = slices_[idx];
    return {grads_.data() + s.offset, s.length};
  }

  /// Name of the slice containing a flat index (for error messages).
  std::string_view slice_name_at(std::size_t flat_index) const {
    for (const auto& s : slices_) {
      if (flat_index >= s.offset && flat_index < s.offset + s.length) return s.name;
    }
    return "<unknown>";
  }

 private:
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<ParamSlice> slices_;
};

}  // namespace kanppo
