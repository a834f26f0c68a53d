#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kanppo/layers.hpp"
#include "kanppo/param_store.hpp"
#include "kanppo/rng.hpp"

namespace kanppo {

/// The four actor/critic configurations under study. KAN stacks always have
/// zero hidden layers; MLP stacks use tanh hidden layers of fixed width.
enum class Arch { kMlpA2C2, kMlpA1C2, kKanActor, kFullKan };

Arch arch_from_string(std::string_view name);  // throws ConfigError on unknown
std::string_view arch_name(Arch arch);
const std::vector<std::string>& arch_names();

struct NetworkSpec {
  Arch arch = Arch::kKanActor;
  int k = 2;         // spline order
  int g = 3;         // grid intervals
  int hidden = 64;   // MLP hidden width
};

using Layer = std::variant<KanLayer, MlpLayer>;
using LayerCache = std::variant<KanCache, MlpCache>;

/// Per-stack forward/backward scratch: one cache per layer plus activation
/// buffers, so repeated passes allocate nothing.
struct StackCache {
  std::vector<LayerCache> layers;
  std::vector<std::vector<double>> acts;   // acts[i] = output of layer i
  std::vector<double> delta_a, delta_b;    // backward ping-pong buffers
};

/// Actor network, critic network, and the state-independent log-sigma vector.
/// All learnable state lives in one flat ParamStore; log_std is excluded from
/// reported parameter counts.
struct ActorCritic {
  NetworkSpec spec;
  int obs_dim = 0;
  int act_dim = 0;
  ParamStore params;
  std::vector<Layer> actor;
  std::vector<Layer> critic;
  std::size_t log_std_slice = 0;

  std::span<const double> log_std() const { return params.values(log_std_slice); }
  std::span<double> log_std_mut() { return params.values(log_std_slice); }
};

/// Deterministic given the Rng seed: same spec + same seed gives bitwise
/// identical initial parameters. KAN coefficients ~ N(0, 0.1/sqrt(g+k));
/// MLP weights orthogonally initialized (gain sqrt(2) hidden, 0.01 output);
/// biases and log_std start at 0.
ActorCritic build_network(const NetworkSpec& spec, int obs_dim, int act_dim, Rng& rng);

struct ParamCounts {
  long long actor = 0;
  long long critic = 0;
};

/// Closed-form parameter counts (log_std excluded).
ParamCounts count_params(const NetworkSpec& spec, int obs_dim, int act_dim);

/// Actual active parameter count of a built network (honors pruning masks,
/// excludes log_std).
long long active_param_count(const ActorCritic& net);

StackCache make_stack_cache(const std::vector<Layer>& stack);
void stack_forward(const std::vector<Layer>& stack, const ParamStore& params,
                   std::span<const double> x, StackCache& cache, std::span<double> y);
/// dl_dx may be empty when input gradients are not needed.
void stack_backward(const std::vector<Layer>& stack, ParamStore& params,
                    StackCache& cache, std::span<const double> dl_dy,
                    std::span<double> dl_dx);

/// Reusable scratch for one network (not thread-safe; clone per thread).
struct Workspace {
  StackCache actor;
  StackCache critic;
  std::vector<double> mean;    // act_dim
  std::vector<double> dmean;   // act_dim
  std::vector<double> vout;    // 1
  std::vector<double> dvout;   // 1
};

Workspace make_workspace(const ActorCritic& net);

/// Action mean for an observation (forward only).
void actor_mean(const ActorCritic& net, Workspace& ws, std::span<const double> obs,
                std::span<double> mean_out);
/// State value estimate.
double critic_value(const ActorCritic& net, Workspace& ws, std::span<const double> obs);

/// Importance mask for one KAN layer: keep[j*n_in+i] plus the mean |phi|
/// importance scores that produced it.
struct LayerPruneInfo {
  std::string stack;         // "actor" or "critic"
  std::size_t layer_index = 0;
  int n_in = 0, n_out = 0;
  std::vector<double> importance;   // n_out * n_in
  std::vector<std::uint8_t> keep;
};

struct PruneReport {
  double threshold = 0.0;
  std::vector<LayerPruneInfo> layers;
  long long params_before = 0;
  long long params_after = 0;
  long long edges_total = 0;
  long long edges_pruned = 0;
};

/// Magnitude pruning of KAN edges: importance(j,i) is the mean of
/// |phi_{j,i}(x_i)| over the probe batch; edges with importance < threshold
/// are masked so forward and backward treat them as exactly zero.
/// probe_obs is batch * obs_dim, already normalized like training inputs.
/// Throws ConfigError on an empty batch or negative threshold.
PruneReport prune(ActorCritic& net, std::span<const double> probe_obs, int batch,
                  double threshold);

/// All edge importances of every KAN layer, sorted ascending (for threshold
/// selection). Same probe conventions as prune().
std::vector<double> edge_importances(ActorCritic& net,
                                     std::span<const double> probe_obs, int batch);

}  // namespace kanppo
