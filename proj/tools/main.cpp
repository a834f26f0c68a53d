// kanppo command-line interface: train / eval / count-params / bench /
// prune / plot-data. Exit codes: 0 success, 2 usage or config error,
// 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kanppo/errors.hpp"
#include "kanppo/harness.hpp"

namespace {

using namespace kanppo;

struct TrainFlags {
  std::optional<std::string> config;
  std::optional<std::string> env;
  std::optional<std::string> arch;
  std::optional<int> k, g;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> seeds;
  std::optional<long long> total_steps;
  std::optional<std::string> out;
  std::optional<int> horizon;
  std::optional<bool> walltime;
};

RunConfig resolve_config(const TrainFlags& f) {
  RunConfig cfg = f.config ? parse_config_file(*f.config) : RunConfig{};
  if (f.env) cfg.env = *f.env;
  if (f.arch) cfg.arch = *f.arch;
  if (f.k) cfg.k = *f.k;
  if (f.g) cfg.g = *f.g;
  if (f.seeds) apply_config_kv(cfg, "seeds", *f.seeds);
  if (f.seed) cfg.seeds = {*f.seed};
  if (f.total_steps) cfg.ppo.total_steps = *f.total_steps;
  if (f.out) cfg.out_dir = *f.out;
  if (f.horizon) cfg.ppo.horizon = *f.horizon;
  if (f.walltime) cfg.ppo.walltime = *f.walltime;
  return cfg;
}

void run_train(const TrainFlags& f) {
  const RunConfig cfg = resolve_config(f);
  std::printf("training %s / %s (k=%d, g=%d), %lld steps, %zu seed(s) -> %s\n",
              cfg.env.c_str(), cfg.arch.c_str(), cfg.k, cfg.g,
              cfg.ppo.total_steps, cfg.seeds.size(), cfg.out_dir.c_str());
  const auto outcomes = cmd_train(cfg);
  for (const auto& o : outcomes) {
    std::printf("seed %llu: final mean return %.3f\n  metrics    %s\n  checkpoint %s\n",
                static_cast<unsigned long long>(o.seed), o.final_mean_return,
                o.metrics_path.c_str(), o.checkpoint_path.c_str());
  }
}

// Accepts a task name, a dims-registry name, or an "OBS:ACT" pair.
void resolve_bench_dims(const std::string& env, int& obs_dim, int& act_dim) {
  for (const auto& name : env_names()) {
    if (name == env) {
      const auto e = make_env(name, 0);
      obs_dim = e->descriptor().obs_dim;
      act_dim = e->descriptor().act_dim;
      return;
    }
  }
  for (const auto& d : param_table_dims()) {
    if (d.name == env) {
      obs_dim = d.obs_dim;
      act_dim = d.act_dim;
      return;
    }
  }
  const auto colon = env.find(':');
  if (colon != std::string::npos) {
    try {
      obs_dim = std::stoi(env.substr(0, colon));
      act_dim = std::stoi(env.substr(colon + 1));
      if (obs_dim >= 1 && act_dim >= 1) return;
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("bench: unknown env/dims '" + env +
                    "' (task name, table name, or OBS:ACT)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KAN and MLP actor-critic PPO workbench"};
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "Train one or more seeds");
  train_cmd->add_option("--config", tf.config, "key = value config file");
  train_cmd->add_option("--env", tf.env, "environment name");
  train_cmd->add_option("--arch", tf.arch, "full-kan | kan-actor | mlp-a2c2 | mlp-a1c2");
  train_cmd->add_option("--k", tf.k, "spline order");
  train_cmd->add_option("--g", tf.g, "spline grid intervals");
  train_cmd->add_option("--seed", tf.seed, "single seed (overrides --seeds)");
  train_cmd->add_option("--seeds", tf.seeds, "comma-separated seed list");
  train_cmd->add_option("--total-steps", tf.total_steps, "environment steps per seed");
  train_cmd->add_option("--horizon", tf.horizon, "rollout length T");
  train_cmd->add_option("--out", tf.out, "output directory");
  train_cmd->add_flag("--walltime", [&tf](std::int64_t) { tf.walltime = true; },
                      "record wall_seconds in metrics (breaks bitwise rerun identity)");
  train_cmd->callback([&tf]() { run_train(tf); });

  std::string eval_ckpt;
  int eval_episodes = 100;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint deterministically");
  eval_cmd->add_option("checkpoint", eval_ckpt, "checkpoint JSON path")->required();
  eval_cmd->add_option("--episodes", eval_episodes, "evaluation episodes");
  eval_cmd->add_option("--seed", eval_seed, "evaluation seed");
  eval_cmd->callback([&]() {
    const EvalReport rep = cmd_eval(eval_ckpt, eval_episodes, eval_seed);
    std::printf("mean return %.6f +- %.6f over %d episodes (deterministic policy)\n",
                rep.mean_return, rep.std_return, rep.episodes);
  });

  int cp_k = 2, cp_g = 3;
  auto* count_cmd = app.add_subcommand("count-params", "Parameter-count table");
  count_cmd->add_option("--k", cp_k, "spline order");
  count_cmd->add_option("--g", cp_g, "spline grid intervals");
  count_cmd->callback([&]() {
    std::fputs(format_param_table(make_param_table(cp_k, cp_g)).c_str(), stdout);
  });

  std::vector<std::string> bench_archs;
  std::string bench_env = "halfcheetah";
  int bench_steps = 1000, bench_k = 2, bench_g = 3;
  auto* bench_cmd = app.add_subcommand("bench", "Actor inference latency comparison");
  bench_cmd->add_option("archs", bench_archs, "architectures to time");
  bench_cmd->add_option("--env", bench_env, "task name, table name, or OBS:ACT dims");
  bench_cmd->add_option("--steps", bench_steps, "forward passes per architecture");
  bench_cmd->add_option("--k", bench_k, "spline order");
  bench_cmd->add_option("--g", bench_g, "spline grid intervals");
  bench_cmd->callback([&]() {
    if (bench_archs.empty()) bench_archs = {"kan-actor", "mlp-a2c2"};
    int obs_dim = 0, act_dim = 0;
    resolve_bench_dims(bench_env, obs_dim, act_dim);
    std::printf("bench: %d deterministic actor steps on %d:%d observations\n",
                bench_steps, obs_dim, act_dim);
    for (const auto& r : cmd_bench(bench_archs, obs_dim, act_dim, bench_steps,
                                   bench_k, bench_g, 0)) {
      std::printf("%-10s %8lld actor params  total %9.4f s  per-step %10.3f us\n",
                  r.arch.c_str(), r.actor_params, r.total_seconds,
                  r.per_step_seconds * 1e6);
    }
  });

  std::string prune_ckpt, prune_out;
  double prune_threshold = std::nan("");
  int probe_episodes = 10, prune_eval_episodes = 100;
  std::uint64_t prune_seed = 0;
  auto* prune_cmd = app.add_subcommand("prune", "Mask low-importance KAN edges");
  prune_cmd->add_option("checkpoint", prune_ckpt, "checkpoint JSON path")->required();
  prune_cmd->add_option("--threshold", prune_threshold,
                        "importance threshold (omit for automatic scan)");
  prune_cmd->add_option("--episodes", probe_episodes, "probe episodes");
  prune_cmd->add_option("--eval-episodes", prune_eval_episodes, "evaluation episodes");
  prune_cmd->add_option("--seed", prune_seed, "probe/eval seed");
  prune_cmd->add_option("--out", prune_out, "output checkpoint path");
  prune_cmd->callback([&]() {
    std::filesystem::path out = prune_out.empty()
        ? std::filesystem::path(prune_ckpt + ".pruned.json")
        : std::filesystem::path(prune_out);
    const PruneOutcome o = cmd_prune(prune_ckpt, prune_threshold, probe_episodes,
                                     prune_eval_episodes, prune_seed, out);
    std::printf("threshold %.6g%s: pruned %lld of %lld edges\n", o.report.threshold,
                o.auto_selected ? " (auto)" : "", o.report.edges_pruned,
                o.report.edges_total);
    std::printf("params %lld -> %lld\n", o.report.params_before, o.report.params_after);
    std::printf("eval return %.4f -> %.4f over %d episodes\n",
                o.eval_before.mean_return, o.eval_after.mean_return,
                o.eval_before.episodes);
    std::printf("wrote %s\n", o.out_path.c_str());
  });

  std::string plot_dir, plot_out;
  auto* plot_cmd = app.add_subcommand("plot-data", "Aggregate metrics CSVs into curves");
  plot_cmd->add_option("metrics_dir", plot_dir, "directory of per-seed CSVs")->required();
  plot_cmd->add_option("--out", plot_out, "output directory (default: metrics dir)");
  plot_cmd->callback([&]() {
    const std::filesystem::path out = plot_out.empty() ? plot_dir : plot_out;
    const auto curves = cmd_plot_data(plot_dir, out);
    for (const auto& [key, pts] : curves) {
      std::printf("%s: %zu points -> %s\n", key.c_str(), pts.size(),
                  (out / (key + "_curve.csv")).c_str());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
