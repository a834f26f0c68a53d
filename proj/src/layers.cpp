#include "kanppo/layers.hpp"

#include <atomic>
#include <cmath>

#include "kanppo/errors.hpp"

namespace kanppo {

namespace {
std::uint64_t next_layer_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}
}  // namespace

long long KanLayer::active_edges() const {
  long long n = 0;
  for (auto k : keep) n += (k != 0);
  return n;
}

KanLayer make_kan_layer(ParamStore& store, const std::string& name, int n_in,
                        int n_out, const KnotGrid& grid) {
  if (n_in < 1 || n_out < 1) throw ConfigError("make_kan_layer: dims must be >= 1");
  KanLayer layer;
  layer.n_in = n_in;
  layer.n_out = n_out;
  layer.grid = grid;
  layer.coeff_slice = store.add_slice(
      name + ".coeffs",
      static_cast<std::size_t>(n_out) * n_in * grid.basis_count());
  layer.keep.assign(static_cast<std::size_t>(n_out) * n_in, 1);
  layer.id = next_layer_id();
  return layer;
}

KanCache make_kan_cache(const KanLayer& layer) {
  KanCache c;
  c.layer_id = layer.id;
  c.x_raw.resize(static_cast<std::size_t>(layer.n_in));
  c.basis.resize(static_cast<std::size_t>(layer.n_in) * layer.basis_count());
  c.scratch.resize(static_cast<std::size_t>(layer.basis_count()));
  return c;
}

void kan_forward(const KanLayer& layer, const ParamStore& store,
                 std::span<const double> x, KanCache& cache, std::span<double> y) {
  const int nb = layer.basis_count();
  if (static_cast<int>(x.size()) != layer.n_in ||
      static_cast<int>(y.size()) != layer.n_out) {
    throw ConfigError("kan_forward: dimension mismatch");
  }
  if (cache.layer_id != layer.id) cache = make_kan_cache(layer);

  for (int i = 0; i < layer.n_in; ++i) {
    cache.x_raw[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
    basis_values(layer.grid, x[static_cast<std::size_t>(i)],
                 std::span<double>(cache.basis.data() + static_cast<std::size_t>(i) * nb,
                                   static_cast<std::size_t>(nb)));
  }

  const double* coeffs = store.values(layer.coeff_slice).data();
  for (int j = 0; j < layer.n_out; ++j) {
    double acc = 0.0;
    for (int i = 0; i < layer.n_in; ++i) {
      if (!layer.edge_active(j, i)) continue;
      const double* c = coeffs + layer.coeff_offset(j, i);
      const double* b = cache.basis.data() + static_cast<std::size_t>(i) * nb;
      double dot = 0.0;
      for (int m = 0; m < nb; ++m) dot += c[m] * b[m];
      acc += dot;
    }
    y[static_cast<std::size_t>(j)] = acc;
  }
  cache.valid = true;
}

void kan_backward(const KanLayer& layer, ParamStore& store, const KanCache& cache,
                  std::span<const double> dl_dy, std::span<double> dl_dx) {
  const int nb = layer.basis_count();
  if (!cache.valid || cache.layer_id != layer.id ||
      static_cast<int>(cache.x_raw.size()) != layer.n_in) {
    throw ConfigError("kan_backward: stale or missing forward cache");
  }
  if (static_cast<int>(dl_dy.size()) != layer.n_out) {
    throw ConfigError("kan_backward: dimension mismatch");
  }
  const bool want_dx = !dl_dx.empty();
  if (want_dx && static_cast<int>(dl_dx.size()) != layer.n_in) {
    throw ConfigError("kan_backward: dl_dx length mismatch");
  }

  double* cg = store.grads(layer.coeff_slice).data();
  const double* coeffs = store.values(layer.coeff_slice).data();

  // dL/dc_{j,i,m} = dL/dy_j * N_m(x_i)
  for (int j = 0; j < layer.n_out; ++j) {
    const double gy = dl_dy[static_cast<std::size_t>(j)];
    if (gy == 0.0) continue;
    for (int i = 0; i < layer.n_in; ++i) {
      if (!layer.edge_active(j, i)) continue;
      double* g = cg + layer.coeff_offset(j, i);
      const double* b = cache.basis.data() + static_cast<std::size_t>(i) * nb;
      for (int m = 0; m < nb; ++m) g[m] += gy * b[m];
    }
  }

  if (!want_dx) return;
  // dL/dx_i = sum_j dL/dy_j * phi'_{j,i}(x_i); zero where the grid clamped.
  auto& db = const_cast<std::vector<double>&>(cache.scratch);
  for (int i = 0; i < layer.n_in; ++i) {
    const double xi = cache.x_raw[static_cast<std::size_t>(i)];
    if (xi < layer.grid.lo || xi > layer.grid.hi) {
      dl_dx[static_cast<std::size_t>(i)] = 0.0;
      continue;
    }
    basis_derivatives(layer.grid, xi, db);
    double acc = 0.0;
    for (int j = 0; j < layer.n_out; ++j) {
      if (!layer.edge_active(j, i)) continue;
      const double gy = dl_dy[static_cast<std::size_t>(j)];
      if (gy == 0.0) continue;
      const double* c = coeffs + layer.coeff_offset(j, i);
      double dphi = 0.0;
      for (int m = 0; m < nb; ++m) dphi += c[m] * db[static_cast<std::size_t>(m)];
      acc += gy * dphi;
    }
    dl_dx[static_cast<std::size_t>(i)] = acc;
  }
}

MlpLayer make_mlp_layer(ParamStore& store, const std::string& name, int n_in,
                        int n_out, Activation act) {
  if (n_in < 1 || n_out < 1) throw ConfigError("make_mlp_layer: dims must be >= 1");
  MlpLayer layer;
  layer.n_in = n_in;
  layer.n_out = n_out;
  layer.act = act;
  layer.weight_slice =
      store.add_slice(name + ".w", static_cast<std::size_t>(n_out) * n_in);
  layer.bias_slice = store.add_slice(name + ".b", static_cast<std::size_t>(n_out));
  layer.id = next_layer_id();
  return layer;
}

MlpCache make_mlp_cache(const MlpLayer& layer) {
  MlpCache c;
  c.layer_id = layer.id;
  c.x.resize(static_cast<std::size_t>(layer.n_in));
  c.z.resize(static_cast<std::size_t>(layer.n_out));
  return c;
}

void mlp_forward(const MlpLayer& layer, const ParamStore& store,
                 std::span<const double> x, MlpCache& cache, std::span<double> y) {
  if (static_cast<int>(x.size()) != layer.n_in ||
      static_cast<int>(y.size()) != layer.n_out) {
    throw ConfigError("mlp_forward: dimension mismatch");
  }
  if (cache.layer_id != layer.id) cache = make_mlp_cache(layer);

  const double* w = store.values(layer.weight_slice).data();
  const double* b = store.values(layer.bias_slice).data();
  for (int i = 0; i < layer.n_in; ++i) cache.x[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];

  for (int j = 0; j < layer.n_out; ++j) {
    const double* row = w + static_cast<std::size_t>(j) * layer.n_in;
    double acc = b[j];
    for (int i = 0; i < layer.n_in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
    cache.z[static_cast<std::size_t>(j)] = acc;
    switch (layer.act) {
      case Activation::kTanh: y[static_cast<std::size_t>(j)] = std::tanh(acc); break;
      case Activation::kRelu: y[static_cast<std::size_t>(j)] = acc > 0.0 ? acc : 0.0; break;
      case Activation::kIdentity: y[static_cast<std::size_t>(j)] = acc; break;
    }
  }
  cache.valid = true;
}

void mlp_backward(const MlpLayer& layer, ParamStore& store, const MlpCache& cache,
                  std::span<const double> dl_dy, std::span<double> dl_dx) {
  if (!cache.valid || cache.layer_id != layer.id) {
    throw ConfigError("mlp_backward: stale or missing forward cache");
  }
  if (static_cast<int>(dl_dy.size()) != layer.n_out) {
    throw ConfigError("mlp_backward: dimension mismatch");
  }
  const bool want_dx = !dl_dx.empty();
  if (want_dx && static_cast<int>(dl_dx.size()) != layer.n_in) {
    throw ConfigError("mlp_backward: dl_dx length mismatch");
  }

  double* wg = store.grads(layer.weight_slice).data();
  double* bg = store.grads(layer.bias_slice).data();
  const double* w = store.values(layer.weight_slice).data();

  if (want_dx) {
    for (int i = 0; i < layer.n_in; ++i) dl_dx[static_cast<std::size_t>(i)] = 0.0;
  }
  for (int j = 0; j < layer.n_out; ++j) {
    double dz = dl_dy[static_cast<std::size_t>(j)];
    const double z = cache.z[static_cast<std::size_t>(j)];
    switch (layer.act) {
      case Activation::kTanh: {
        const double t = std::tanh(z);
        dz *= 1.0 - t * t;
        break;
      }
      case Activation::kRelu:
        dz *= z > 0.0 ? 1.0 : 0.0;
        break;
      case Activation::kIdentity:
        break;
    }
    if (dz == 0.0) continue;
    bg[j] += dz;
    double* grow = wg + static_cast<std::size_t>(j) * layer.n_in;
    const double* wrow = w + static_cast<std::size_t>(j) * layer.n_in;
    for (int i = 0; i < layer.n_in; ++i) grow[i] += dz * cache.x[static_cast<std::size_t>(i)];
    if (want_dx) {
      for (int i = 0; i < layer.n_in; ++i) dl_dx[static_cast<std::size_t>(i)] += dz * wrow[i];
    }
  }
}

}  // namespace kanppo
