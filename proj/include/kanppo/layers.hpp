#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kanppo/param_store.hpp"
#include "kanppo/spline.hpp"

namespace kanppo {

/// One KAN layer: every edge (out j, in i) carries a learnable univariate
/// spline with g + k coefficients over a grid shared by the whole layer.
/// Outputs are plain sums of edge splines; there are no biases and no
/// residual branch, so the parameter count is exactly n_in*n_out*(g+k).
struct KanLayer {
  int n_in = 0;
  int n_out = 0;
  KnotGrid grid;
  std::size_t coeff_slice = 0;          // [n_out][n_in][basis] row-major
  std::vector<std::uint8_t> keep;       // n_out * n_in, 0 = edge pruned
  std::uint64_t id = 0;

  int basis_count() const { return grid.basis_count(); }
  std::size_t coeff_offset(int out, int in) const {
    return (static_cast<std::size_t>(out) * n_in + in) *
           static_cast<std::size_t>(grid.basis_count());
  }
  bool edge_active(int out, int in) const {
    return keep[static_cast<std::size_t>(out) * n_in + in] != 0;
  }
  long long active_edges() const;
};

struct KanCache {
  std::uint64_t layer_id = 0;
  bool valid = false;
  std::vector<double> x_raw;   // pre-clamp inputs, n_in
  std::vector<double> basis;   // n_in * basis_count
  std::vector<double> scratch; // basis_count, derivative workspace
};

KanLayer make_kan_layer(ParamStore& store, const std::string& name, int n_in,
                        int n_out, const KnotGrid& grid);
KanCache make_kan_cache(const KanLayer& layer);

/// y_j = sum_i phi_{j,i}(x_i) over active edges. The cache keeps the inputs
/// and per-input basis vectors for the matching backward call.
void kan_forward(const KanLayer& layer, const ParamStore& store,
                 std::span<const double> x, KanCache& cache, std::span<double> y);

/// Accumulates dL/dcoeffs into store grads; writes dL/dx into dl_dx unless it
/// is empty. Inputs clamped by the grid propagate zero input-gradient.
/// Throws ConfigError on a stale or mismatched cache.
void kan_backward(const KanLayer& layer, ParamStore& store, const KanCache& cache,
                  std::span<const double> dl_dy, std::span<double> dl_dx);

enum class Activation { kTanh, kRelu, kIdentity };

/// Dense layer y = act(W x + b), W stored row-major.
struct MlpLayer {
  int n_in = 0;
  int n_out = 0;
  Activation act = Activation::kTanh;
  std::size_t weight_slice = 0;
  std::size_t bias_slice = 0;
  std::uint64_t id = 0;
};

struct MlpCache {
  std::uint64_t layer_id = 0;
  bool valid = false;
  std::vector<double> x;  // n_in
  std::vector<double> z;  // n_out, pre-activation
};

MlpLayer make_mlp_layer(ParamStore& store, const std::string& name, int n_in,
                        int n_out, Activation act);
MlpCache make_mlp_cache(const MlpLayer& layer);

void mlp_forward(const MlpLayer& layer, const ParamStore& store,
                 std::span<const double> x, MlpCache& cache, std::span<double> y);
void mlp_backward(const MlpLayer& layer, ParamStore& store, const MlpCache& cache,
                  std::span<const double> dl_dy, std::span<double> dl_dx);

}  // namespace kanppo
