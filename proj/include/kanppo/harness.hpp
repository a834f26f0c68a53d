#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kanppo/checkpoint.hpp"
#include "kanppo/network.hpp"
#include "kanppo/ppo.hpp"

namespace kanppo {

/// Full description of a training run. Mirrors the flat key=value config-file
/// format one to one; CLI flags override file values.
struct RunConfig {
  std::string env = "point-reacher";
  std::string arch = "kan-actor";
  int k = 2;
  int g = 3;
  int hidden = 64;
  PpoConfig ppo;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::string out_dir = "runs";

  void validate() const;  // throws ConfigError
  NetworkSpec network_spec() const;
};

/// Parses "key = value" lines ('#' starts a comment). Unknown keys and
/// malformed values throw ConfigError naming the offender.
RunConfig parse_config_file(const std::filesystem::path& path);
/// Applies one key=value pair (the config-file grammar and the CLI override
/// path share this).
void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value);

/// In-memory result of one seed's training.
struct SeedRunResult {
  std::uint64_t seed = 0;
  TrainResult train;
  Checkpoint checkpoint;  // trained net + frozen normalizer
};

/// Trains one seed end to end (env, network init and sampling streams all
/// derived from the seed). Deterministic.
SeedRunResult run_seed(const RunConfig& cfg, std::uint64_t seed);

struct TrainOutcome {
  std::uint64_t seed = 0;
  std::filesystem::path metrics_path;
  std::filesystem::path checkpoint_path;
  double final_mean_return = 0.0;
};

/// Runs every configured seed (workers capped by KANPPO_THREADS) and writes
/// one metrics CSV plus one checkpoint per seed into cfg.out_dir.
std::vector<TrainOutcome> cmd_train(const RunConfig& cfg);

/// Deterministic evaluation of a stored checkpoint.
EvalReport cmd_eval(const std::filesystem::path& checkpoint_path, int episodes,
                    std::uint64_t eval_seed);

// ---------------------------------------------------------------------------
// Parameter-count table

struct ParamTableRow {
  std::string env;
  int obs_dim = 0;
  int act_dim = 0;
  long long kan_actor = 0;
  long long mlp_a2_actor = 0;
  long long mlp_a1_actor = 0;
  long long kan_critic = 0;
  long long mlp_critic = 0;
  long long total_full_kan = 0;
  long long total_kan_actor = 0;
  long long total_mlp_a2c2 = 0;
  long long total_mlp_a1c2 = 0;
};

struct ParamTable {
  std::vector<ParamTableRow> rows;  // one per dims-registry entry
  ParamTableRow footer;             // per-column means, truncated toward zero
};

ParamTable make_param_table(int k, int g, int hidden = 64);
std::string format_param_table(const ParamTable& table);

// ---------------------------------------------------------------------------
// Latency benchmark

struct BenchResult {
  std::string arch;
  long long actor_params = 0;
  double total_seconds = 0.0;
  double per_step_seconds = 0.0;
  int steps = 0;
};

/// Times deterministic actor inference over an identical pre-generated
/// observation stream for each architecture. Single-threaded.
std::vector<BenchResult> cmd_bench(const std::vector<std::string>& archs, int obs_dim,
                                   int act_dim, int steps, int k, int g,
                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Pruning

struct PruneOutcome {
  PruneReport report;
  EvalReport eval_before;
  EvalReport eval_after;
  std::filesystem::path out_path;
  bool auto_selected = false;
};

/// Loads a checkpoint, gathers probe observations from `probe_episodes`
/// deterministic episodes, prunes at `threshold`, evaluates before/after and
/// writes the masked checkpoint. threshold = NaN triggers an automatic scan:
/// the largest importance-percentile threshold that removes at least 10% of
/// edges while degrading mean return by at most 20%. Throws ConfigError when
/// the checkpoint has no KAN layers.
PruneOutcome cmd_prune(const std::filesystem::path& checkpoint_path, double threshold,
                       int probe_episodes, int eval_episodes, std::uint64_t eval_seed,
                       const std::filesystem::path& out_path);

// ---------------------------------------------------------------------------
// Plot data

struct CurvePoint {
  long long env_step = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  int seeds = 0;
};

/// Aggregates per-seed metrics CSVs (named {env}_{arch}_seed{N}.csv) into one
/// {env}_{arch}_curve.csv per group: cross-seed mean and population std of
/// mean_return at each env_step. Returns the aggregated curves keyed by
/// "{env}_{arch}". Throws ConfigError when no metrics files are found.
std::map<std::string, std::vector<CurvePoint>> cmd_plot_data(
    const std::filesystem::path& metrics_dir, const std::filesystem::path& out_dir);

/// Worker cap: min(task count, KANPPO_THREADS if set else hardware threads).
int worker_count(int tasks);

}  // namespace kanppo
