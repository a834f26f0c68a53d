#pragma once

#include <span>
#include <vector>

namespace kanppo {

/// Uniform B-spline knot grid of degree `order` (k) with `intervals` (g)
/// segments on [lo, hi], extended k uniform steps beyond each bound. The
/// grid carries g + 2k + 1 knots and supports g + k basis functions.
/// Immutable after construction; freely shareable.
struct KnotGrid {
  int order = 2;
  int intervals = 3;
  double lo = -1.0;
  double hi = 1.0;
  std::vector<double> knots;

  static KnotGrid uniform(int order, int intervals, double lo = -1.0, double hi = 1.0);

  int basis_count() const { return intervals + order; }

  /// Inputs outside [lo, hi] are clamped before basis evaluation (constant
  /// extrapolation beyond the grid).
  double clamp(double x) const {
    if (x < lo) return lo;
    if (x > hi) return hi;
    return x;
  }

  /// Knot span index i in [order, order + intervals - 1] with
  /// knots[i] <= x (< knots[i+1], the last span being closed on the right).
  int span_of(double x) const;
};

using BasisVector = std::vector<double>;

/// Writes N_{i,k}(x) for i = 0..g+k-1 into `out` (length basis_count).
/// The nonzero window has at most k+1 entries and sums to 1 on [lo, hi].
void basis_values(const KnotGrid& grid, double x, std::span<double> out);
BasisVector basis_values(const KnotGrid& grid, double x);

/// Writes dN_{i,k}/dx into `out`. Requires order >= 1 (degree-0 grids have
/// no derivative at breakpoints); throws ConfigError otherwise.
void basis_derivatives(const KnotGrid& grid, double x, std::span<double> out);
BasisVector basis_derivatives(const KnotGrid& grid, double x);

/// sum_i coeffs[i] * N_{i,k}(x). coeffs must have length g + k
/// (throws ConfigError on mismatch).
double eval_spline(std::span<const double> coeffs, const KnotGrid& grid, double x);

}  // namespace kanppo
