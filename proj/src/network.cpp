#include "kanppo/network.hpp"

#include <algorithm>
#include <cmath>

#include "kanppo/errors.hpp"

namespace kanppo {

Arch arch_from_string(std::string_view name) {
  if (name == "mlp-a2c2") return Arch::kMlpA2C2;
  if (name == "mlp-a1c2") return Arch::kMlpA1C2;
  if (name == "kan-actor") return Arch::kKanActor;
  if (name == "full-kan") return Arch::kFullKan;
  throw ConfigError("unknown architecture '" + std::string(name) +
                    "' (expected mlp-a2c2, mlp-a1c2, kan-actor, full-kan)");
}

std::string_view arch_name(Arch arch) {
  switch (arch) {
    case Arch::kMlpA2C2: return "mlp-a2c2";
    case Arch::kMlpA1C2: return "mlp-a1c2";
    case Arch::kKanActor: return "kan-actor";
    case Arch::kFullKan: return "full-kan";
  }
  return "?";
}

const std::vector<std::string>& arch_names() {
  static const std::vector<std::string> names = {"full-kan", "kan-actor",
                                                 "mlp-a2c2", "mlp-a1c2"};
  return names;
}

namespace {

void fill_gaussian(std::span<double> out, double stddev, Rng& rng) {
  for (auto& v : out) v = stddev * rng.normal();
}

// Orthogonal init: Gaussian matrix, modified Gram-Schmidt over the shorter
// side to orthonormal vectors, then a uniform scale by gain. Tall matrices
// (rows > cols) end up with W^T W = gain^2 I; wide ones with W W^T = gain^2 I.
// rows = n_out, cols = n_in, row-major.
void orthogonal_init(std::span<double> w, int rows, int cols, double gain, Rng& rng) {
  for (auto& v : w) v = rng.normal();
  auto row_dot = [&](int a, int b) {
    double acc = 0.0;
    for (int i = 0; i < cols; ++i)
      acc += w[static_cast<std::size_t>(a) * cols + i] * w[static_cast<std::size_t>(b) * cols + i];
    return acc;
  };
  auto col_dot = [&](int a, int b) {
    double acc = 0.0;
    for (int i = 0; i < rows; ++i)
      acc += w[static_cast<std::size_t>(i) * cols + a] * w[static_cast<std::size_t>(i) * cols + b];
    return acc;
  };
  if (rows <= cols) {
    for (int r = 0; r < rows; ++r) {
      for (int p = 0; p < r; ++p) {
        const double proj = row_dot(r, p);  // earlier rows are unit norm
        for (int i = 0; i < cols; ++i)
          w[static_cast<std::size_t>(r) * cols + i] -= proj * w[static_cast<std::size_t>(p) * cols + i];
      }
      const double norm = std::sqrt(std::max(row_dot(r, r), 1e-300));
      for (int i = 0; i < cols; ++i) w[static_cast<std::size_t>(r) * cols + i] /= norm;
    }
  } else {
    for (int c = 0; c < cols; ++c) {
      for (int p = 0; p < c; ++p) {
        const double proj = col_dot(c, p);  // earlier columns are unit norm
        for (int i = 0; i < rows; ++i)
          w[static_cast<std::size_t>(i) * cols + c] -= proj * w[static_cast<std::size_t>(i) * cols + p];
      }
      const double norm = std::sqrt(std::max(col_dot(c, c), 1e-300));
      for (int i = 0; i < rows; ++i) w[static_cast<std::size_t>(i) * cols + c] /= norm;
    }
  }
  for (auto& v : w) v *= gain;
}

std::vector<Layer> build_mlp_stack(ParamStore& store, const std::string& prefix,
                                   int n_in, int n_out, int hidden, int hidden_layers,
                                   Rng& rng) {
  std::vector<Layer> stack;
  int cur = n_in;
  for (int l = 0; l < hidden_layers; ++l) {
    MlpLayer layer = make_mlp_layer(store, prefix + ".l" + std::to_string(l), cur,
                                    hidden, Activation::kTanh);
    orthogonal_init(store.values(layer.weight_slice), hidden, cur, std::sqrt(2.0), rng);
    stack.emplace_back(layer);
    cur = hidden;
  }
  MlpLayer out = make_mlp_layer(store, prefix + ".out", cur, n_out, Activation::kIdentity);
  orthogonal_init(store.values(out.weight_slice), n_out, cur, 0.01, rng);
  stack.emplace_back(out);
  return stack;
}

std::vector<Layer> build_kan_stack(ParamStore& store, const std::string& prefix,
                                   int n_in, int n_out, int k, int g, Rng& rng) {
  const KnotGrid grid = KnotGrid::uniform(k, g);
  KanLayer layer = make_kan_layer(store, prefix + ".l0", n_in, n_out, grid);
  fill_gaussian(store.values(layer.coeff_slice), 0.1 / std::sqrt(double(g + k)), rng);
  std::vector<Layer> stack;
  stack.emplace_back(std::move(layer));
  return stack;
}

}  // namespace

ActorCritic build_network(const NetworkSpec& spec, int obs_dim, int act_dim, Rng& rng) {
  if (obs_dim < 1 || act_dim < 1) throw ConfigError("build_network: dims must be >= 1");
  if (spec.k < 1 || spec.g < 1) throw ConfigError("build_network: need k >= 1 and g >= 1");
  ActorCritic net;
  net.spec = spec;
  net.obs_dim = obs_dim;
  net.act_dim = act_dim;

  switch (spec.arch) {
    case Arch::kMlpA2C2:
      net.actor = build_mlp_stack(net.params, "actor", obs_dim, act_dim, spec.hidden, 2, rng);
      break;
    case Arch::kMlpA1C2:
      net.actor = build_mlp_stack(net.params, "actor", obs_dim, act_dim, spec.hidden, 1, rng);
      break;
    case Arch::kKanActor:
    case Arch::kFullKan:
      net.actor = build_kan_stack(net.params, "actor", obs_dim, act_dim, spec.k, spec.g, rng);
      break;
  }
  if (spec.arch == Arch::kFullKan) {
    net.critic = build_kan_stack(net.params, "critic", obs_dim, 1, spec.k, spec.g, rng);
  } else {
    net.critic = build_mlp_stack(net.params, "critic", obs_dim, 1, spec.hidden, 2, rng);
  }
  net.log_std_slice = net.params.add_slice("log_std", static_cast<std::size_t>(act_dim));
  return net;
}

ParamCounts count_params(const NetworkSpec& spec, int obs_dim, int act_dim) {
  const long long h = spec.hidden;
  const long long nb = spec.g + spec.k;
  auto mlp2 = [&](long long in, long long out) {
    return (in * h + h) + (h * h + h) + (h * out + out);
  };
  auto mlp1 = [&](long long in, long long out) { return (in * h + h) + (h * out + out); };

  ParamCounts c;
  switch (spec.arch) {
    case Arch::kMlpA2C2: c.actor = mlp2(obs_dim, act_dim); break;
    case Arch::kMlpA1C2: c.actor = mlp1(obs_dim, act_dim); break;
    case Arch::kKanActor:
    case Arch::kFullKan: c.actor = static_cast<long long>(act_dim) * obs_dim * nb; break;
  }
  c.critic = (spec.arch == Arch::kFullKan) ? static_cast<long long>(obs_dim) * nb
                                           : mlp2(obs_dim, 1);
  return c;
}

long long active_param_count(const ActorCritic& net) {
  long long total = 0;
  auto count_stack = [&](const std::vector<Layer>& stack) {
    for (const auto& layer : stack) {
      if (const auto* kan = std::get_if<KanLayer>(&layer)) {
        total += kan->active_edges() * kan->basis_count();
      } else {
        const auto& mlp = std::get<MlpLayer>(layer);
        total += static_cast<long long>(mlp.n_out) * mlp.n_in + mlp.n_out;
      }
    }
  };
  count_stack(net.actor);
  count_stack(net.critic);
  return total;
}

StackCache make_stack_cache(const std::vector<Layer>& stack) {
  StackCache c;
  std::size_t widest = 1;
  for (const auto& layer : stack) {
    std::visit(
        [&](const auto& l) {
          c.layers.emplace_back([&]() -> LayerCache {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, KanLayer>) return make_kan_cache(l);
            else return make_mlp_cache(l);
          }());
          c.acts.emplace_back(static_cast<std::size_t>(l.n_out), 0.0);
          widest = std::max({widest, static_cast<std::size_t>(l.n_in),
                             static_cast<std::size_t>(l.n_out)});
        },
        layer);
  }
  c.delta_a.resize(widest);
  c.delta_b.resize(widest);
  return c;
}

void stack_forward(const std::vector<Layer>& stack, const ParamStore& params,
                   std::span<const double> x, StackCache& cache, std::span<double> y) {
  std::span<const double> cur = x;
  for (std::size_t l = 0; l < stack.size(); ++l) {
    std::span<double> out = cache.acts[l];
    std::visit(
        [&](const auto& layer) {
          using T = std::decay_t<decltype(layer)>;
          if constexpr (std::is_same_v<T, KanLayer>) {
            kan_forward(layer, params, cur, std::get<KanCache>(cache.layers[l]), out);
          } else {
            mlp_forward(layer, params, cur, std::get<MlpCache>(cache.layers[l]), out);
          }
        },
        stack[l]);
    cur = out;
  }
  if (static_cast<int>(y.size()) != static_cast<int>(cur.size())) {
    throw ConfigError("stack_forward: output length mismatch");
  }
  std::copy(cur.begin(), cur.end(), y.begin());
}

void stack_backward(const std::vector<Layer>& stack, ParamStore& params,
                    StackCache& cache, std::span<const double> dl_dy,
                    std::span<double> dl_dx) {
  std::copy(dl_dy.begin(), dl_dy.end(), cache.delta_a.begin());
  std::span<double> cur(cache.delta_a.data(), dl_dy.size());
  std::span<double> next = cache.delta_b;
  for (std::size_t l = stack.size(); l-- > 0;) {
    const bool first = (l == 0);
    std::visit(
        [&](const auto& layer) {
          using T = std::decay_t<decltype(layer)>;
          std::span<double> dx =
              first ? dl_dx : std::span<double>(next.data(), static_cast<std::size_t>(layer.n_in));
          if constexpr (std::is_same_v<T, KanLayer>) {
            kan_backward(layer, params, std::get<KanCache>(cache.layers[l]), cur, dx);
          } else {
            mlp_backward(layer, params, std::get<MlpCache>(cache.layers[l]), cur, dx);
          }
          if (!first) {
            cur = dx;
            next = (dx.data() == cache.delta_a.data()) ? std::span<double>(cache.delta_b)
                                                       : std::span<double>(cache.delta_a);
          }
        },
        stack[l]);
  }
}

Workspace make_workspace(const ActorCritic& net) {
  Workspace ws;
  ws.actor = make_stack_cache(net.actor);
  ws.critic = make_stack_cache(net.critic);
  ws.mean.resize(static_cast<std::size_t>(net.act_dim));
  ws.dmean.resize(static_cast<std::size_t>(net.act_dim));
  ws.vout.resize(1);
  ws.dvout.resize(1);
  return ws;
}

void actor_mean(const ActorCritic& net, Workspace& ws, std::span<const double> obs,
                std::span<double> mean_out) {
  stack_forward(net.actor, net.params, obs, ws.actor, mean_out);
}

double critic_value(const ActorCritic& net, Workspace& ws, std::span<const double> obs) {
  stack_forward(net.critic, net.params, obs, ws.critic, ws.vout);
  return ws.vout[0];
}

namespace {

// Mean |phi_{j,i}(x_i)| per edge for every KAN layer, computed by running the
// probe batch through both stacks so deeper layers see their true inputs.
std::vector<LayerPruneInfo> edge_importance_infos(ActorCritic& net,
                                                  std::span<const double> probe_obs,
                                                  int batch) {
  if (batch < 1) throw ConfigError("prune: probe batch must be non-empty");
  if (probe_obs.size() != static_cast<std::size_t>(batch) * net.obs_dim) {
    throw ConfigError("prune: probe batch size mismatch");
  }

  std::vector<LayerPruneInfo> infos;
  struct Target { const char* stack; std::size_t index; const KanLayer* layer; };
  std::vector<Target> targets;
  for (std::size_t l = 0; l < net.actor.size(); ++l) {
    if (const auto* kan = std::get_if<KanLayer>(&net.actor[l]))
      targets.push_back({"actor", l, kan});
  }
  for (std::size_t l = 0; l < net.critic.size(); ++l) {
    if (const auto* kan = std::get_if<KanLayer>(&net.critic[l]))
      targets.push_back({"critic", l, kan});
  }
  for (const auto& t : targets) {
    LayerPruneInfo info;
    info.stack = t.stack;
    info.layer_index = t.index;
    info.n_in = t.layer->n_in;
    info.n_out = t.layer->n_out;
    info.importance.assign(static_cast<std::size_t>(t.layer->n_out) * t.layer->n_in, 0.0);
    info.keep.assign(info.importance.size(), 1);
    infos.push_back(std::move(info));
  }

  Workspace ws = make_workspace(net);
  std::vector<double> out(static_cast<std::size_t>(
      std::max(net.act_dim, 1)));
  for (int s = 0; s < batch; ++s) {
    std::span<const double> obs(probe_obs.data() + static_cast<std::size_t>(s) * net.obs_dim,
                                static_cast<std::size_t>(net.obs_dim));
    stack_forward(net.actor, net.params, obs, ws.actor,
                  std::span<double>(out.data(), static_cast<std::size_t>(net.act_dim)));
    stack_forward(net.critic, net.params, obs, ws.critic, ws.vout);

    std::size_t which = 0;
    for (const auto& t : targets) {
      auto& info = infos[which++];
      const StackCache& sc = (info.stack == "actor") ? ws.actor : ws.critic;
      const auto& cache = std::get<KanCache>(sc.layers[t.index]);
      const double* coeffs = net.params.values(t.layer->coeff_slice).data();
      const int nb = t.layer->basis_count();
      for (int j = 0; j < t.layer->n_out; ++j) {
        for (int i = 0; i < t.layer->n_in; ++i) {
          const double* c = coeffs + t.layer->coeff_offset(j, i);
          const double* b = cache.basis.data() + static_cast<std::size_t>(i) * nb;
          double phi = 0.0;
          for (int m = 0; m < nb; ++m) phi += c[m] * b[m];
          info.importance[static_cast<std::size_t>(j) * t.layer->n_in + i] += std::abs(phi);
        }
      }
    }
  }
  for (auto& info : infos)
    for (auto& v : info.importance) v /= batch;
  return infos;
}

}  // namespace

PruneReport prune(ActorCritic& net, std::span<const double> probe_obs, int batch,
                  double threshold) {
  if (threshold < 0.0) throw ConfigError("prune: threshold must be >= 0");
  PruneReport report;
  report.threshold = threshold;
  report.params_before = active_param_count(net);
  report.layers = edge_importance_infos(net, probe_obs, batch);

  for (auto& info : report.layers) {
    auto& stack = (info.stack == "actor") ? net.actor : net.critic;
    auto& layer = std::get<KanLayer>(stack[info.layer_index]);
    for (std::size_t e = 0; e < info.importance.size(); ++e) {
      const bool keep = info.importance[e] >= threshold;
      info.keep[e] = keep ? 1 : 0;
      layer.keep[e] = info.keep[e];
      report.edges_total += 1;
      if (!keep) report.edges_pruned += 1;
    }
  }
  report.params_after = active_param_count(net);
  return report;
}

std::vector<double> edge_importances(ActorCritic& net, std::span<const double> probe_obs,
                                     int batch) {
  std::vector<double> all;
  for (const auto& info : edge_importance_infos(net, probe_obs, batch)) {
    all.insert(all.end(), info.importance.begin(), info.importance.end());
  }
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace kanppo
