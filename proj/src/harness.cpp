#include "kanppo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "kanppo/errors.hpp"
#include "kanppo/io.hpp"
#include "kanppo/metrics.hpp"

namespace kanppo {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- RunConfig

void RunConfig::validate() const {
  arch_from_string(arch);  // throws on unknown
  bool known_env = false;
  for (const auto& n : env_names()) known_env = known_env || n == env;
  if (!known_env) throw ConfigError("unknown environment '" + env + "'");
  if (k < 1 || g < 1) throw ConfigError("config: need k >= 1 and g >= 1");
  if (hidden < 1) throw ConfigError("config: hidden must be >= 1");
  if (seeds.empty()) throw ConfigError("config: seeds must be non-empty");
  std::vector<std::uint64_t> sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("config: seeds must be distinct");
  }
  ppo.validate();
}

NetworkSpec RunConfig::network_spec() const {
  NetworkSpec spec;
  spec.arch = arch_from_string(arch);
  spec.k = k;
  spec.g = g;
  spec.hidden = hidden;
  return spec;
}

// ------------------------------------------------------------ config parsing

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + v);
  }
}

long long parse_ll(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + v);
  }
}

double parse_f64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: bad boolean for '" + key + "' (use true/false): " + v);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& v) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      std::size_t pos = 0;
      seeds.push_back(std::stoull(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("config: bad seed '" + tok + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("config: empty seed list");
  return seeds;
}

}  // namespace

void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "env") cfg.env = value;
  else if (key == "arch") cfg.arch = value;
  else if (key == "k") cfg.k = parse_int(key, value);
  else if (key == "g") cfg.g = parse_int(key, value);
  else if (key == "hidden") cfg.hidden = parse_int(key, value);
  else if (key == "epsilon") cfg.ppo.epsilon = parse_f64(key, value);
  else if (key == "c1") cfg.ppo.c1 = parse_f64(key, value);
  else if (key == "c2") cfg.ppo.c2 = parse_f64(key, value);
  else if (key == "lr") cfg.ppo.lr = parse_f64(key, value);
  else if (key == "epochs") cfg.ppo.epochs = parse_int(key, value);
  else if (key == "minibatch") cfg.ppo.minibatch = parse_int(key, value);
  else if (key == "horizon") cfg.ppo.horizon = parse_int(key, value);
  else if (key == "gamma") cfg.ppo.gamma = parse_f64(key, value);
  else if (key == "lambda") cfg.ppo.lambda = parse_f64(key, value);
  else if (key == "total_steps") cfg.ppo.total_steps = parse_ll(key, value);
  else if (key == "eval_episodes") cfg.ppo.eval_episodes = parse_int(key, value);
  else if (key == "normalize_adv") cfg.ppo.normalize_adv = parse_bool(key, value);
  else if (key == "normalize_obs") cfg.ppo.normalize_obs = parse_bool(key, value);
  else if (key == "max_grad_norm") cfg.ppo.max_grad_norm = parse_f64(key, value);
  else if (key == "walltime") cfg.ppo.walltime = parse_bool(key, value);
  else if (key == "seeds") cfg.seeds = parse_seed_list(value);
  else if (key == "out_dir") cfg.out_dir = value;
  else throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig parse_config_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not 'key = value': " + line);
    }
    apply_config_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

// ------------------------------------------------------------------ training

SeedRunResult run_seed(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng root(seed);
  auto env = make_env(cfg.env, root.derive(0xE0));
  const EnvDescriptor& d = env->descriptor();

  Rng init_rng(root.derive(0x01));
  SeedRunResult res;
  res.seed = seed;
  res.checkpoint.env_name = cfg.env;
  res.checkpoint.net = build_network(cfg.network_spec(), d.obs_dim, d.act_dim, init_rng);
  ObsNormalizer norm(d.obs_dim, 5.0, cfg.ppo.normalize_obs);

  Rng train_rng(root.derive(0x02));
  res.train = train(*env, res.checkpoint.net, norm, cfg.ppo, seed, train_rng);
  norm.freeze();
  res.checkpoint.normalizer = norm;
  return res;
}

int worker_count(int tasks) {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("KANPPO_THREADS")) {
    try {
      cap = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw ConfigError("KANPPO_THREADS must be a positive integer");
    }
  }
  return std::max(1, std::min(cap, tasks));
}

std::vector<TrainOutcome> cmd_train(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const int n = static_cast<int>(cfg.seeds.size());
  std::vector<TrainOutcome> outcomes(n);

  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto work = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      {
        std::lock_guard<std::mutex> lock(err_mu);
        if (first_error) return;
      }
      try {
        const std::uint64_t seed = cfg.seeds[i];
        SeedRunResult res = run_seed(cfg, seed);
        const std::string base =
            cfg.env + "_" + cfg.arch + "_seed" + std::to_string(seed);
        TrainOutcome& out = outcomes[i];
        out.seed = seed;
        out.metrics_path = fs::path(cfg.out_dir) / (base + ".csv");
        out.checkpoint_path = fs::path(cfg.out_dir) / (base + ".checkpoint.json");
        atomic_write_text(out.metrics_path, metrics_to_csv(res.train.metrics));
        save_checkpoint(out.checkpoint_path, res.checkpoint);
        if (!res.train.metrics.empty()) {
          out.final_mean_return = res.train.metrics.back().mean_return;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int workers = worker_count(n);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return outcomes;
}

EvalReport cmd_eval(const fs::path& checkpoint_path, int episodes,
                    std::uint64_t eval_seed) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  ckpt.normalizer.freeze();
  auto env = make_env(ckpt.env_name, 0);
  return evaluate(ckpt.net, ckpt.normalizer, *env, episodes, eval_seed);
}

// -------------------------------------------------------------- param table

ParamTable make_param_table(int k, int g, int hidden) {
  auto spec = [&](Arch a) {
    NetworkSpec s;
    s.arch = a;
    s.k = k;
    s.g = g;
    s.hidden = hidden;
    return s;
  };
  ParamTable table;
  for (const DimsEntry& d : param_table_dims()) {
    ParamTableRow row;
    row.env = d.name;
    row.obs_dim = d.obs_dim;
    row.act_dim = d.act_dim;
    const ParamCounts full_kan = count_params(spec(Arch::kFullKan), d.obs_dim, d.act_dim);
    const ParamCounts kan_act = count_params(spec(Arch::kKanActor), d.obs_dim, d.act_dim);
    const ParamCounts a2 = count_params(spec(Arch::kMlpA2C2), d.obs_dim, d.act_dim);
    const ParamCounts a1 = count_params(spec(Arch::kMlpA1C2), d.obs_dim, d.act_dim);
    row.kan_actor = kan_act.actor;
    row.mlp_a2_actor = a2.actor;
    row.mlp_a1_actor = a1.actor;
    row.kan_critic = full_kan.critic;
    row.mlp_critic = a2.critic;
    row.total_full_kan = full_kan.actor + full_kan.critic;
    row.total_kan_actor = kan_act.actor + kan_act.critic;
    row.total_mlp_a2c2 = a2.actor + a2.critic;
    row.total_mlp_a1c2 = a1.actor + a1.critic;
    table.rows.push_back(row);
  }

  const long long n = static_cast<long long>(table.rows.size());
  ParamTableRow& f = table.footer;
  f.env = "average";
  for (const auto& r : table.rows) {
    f.kan_actor += r.kan_actor;
    f.mlp_a2_actor += r.mlp_a2_actor;
    f.mlp_a1_actor += r.mlp_a1_actor;
    f.kan_critic += r.kan_critic;
    f.mlp_critic += r.mlp_critic;
    f.total_full_kan += r.total_full_kan;
    f.total_kan_actor += r.total_kan_actor;
    f.total_mlp_a2c2 += r.total_mlp_a2c2;
    f.total_mlp_a1c2 += r.total_mlp_a1c2;
  }
  // Integer division truncates toward zero, matching the published rounding.
  f.kan_actor /= n;
  f.mlp_a2_actor /= n;
  f.mlp_a1_actor /= n;
  f.kan_critic /= n;
  f.mlp_critic /= n;
  f.total_full_kan /= n;
  f.total_kan_actor /= n;
  f.total_mlp_a2c2 /= n;
  f.total_mlp_a1c2 /= n;
  return table;
}

std::string format_param_table(const ParamTable& table) {
  std::ostringstream out;
  auto row_line = [&](const ParamTableRow& r, bool dims) {
    out << r.env;
    for (std::size_t i = r.env.size(); i < 18; ++i) out << ' ';
    char dim_buf[16] = "";
    if (dims) std::snprintf(dim_buf, sizeof(dim_buf), "%2d:%d", r.obs_dim, r.act_dim);
    out << dim_buf;
    for (std::size_t i = std::string(dim_buf).size(); i < 6; ++i) out << ' ';
    auto col = [&](long long v) {
      std::string s = std::to_string(v);
      for (std::size_t i = s.size(); i < 10; ++i) out << ' ';
      out << s;
    };
    col(r.kan_actor);
    col(r.mlp_a2_actor);
    col(r.mlp_a1_actor);
    col(r.kan_critic);
    col(r.mlp_critic);
    col(r.total_full_kan);
    col(r.total_kan_actor);
    col(r.total_mlp_a2c2);
    col(r.total_mlp_a1c2);
    out << '\n';
  };
  out << "env               dims  "
         " kan-actor  mlp-a2-ac  mlp-a1-ac"
         " kan-critic mlp-critic"
         "  full-kan+ kan-actor+  mlp-a2c2+  mlp-a1c2+\n";
  out << "(+ = actor+critic totals)\n";
  for (const auto& r : table.rows) row_line(r, true);
  row_line(table.footer, false);
  return out.str();
}

// -------------------------------------------------------------------- bench

std::vector<BenchResult> cmd_bench(const std::vector<std::string>& archs, int obs_dim,
                                   int act_dim, int steps, int k, int g,
                                   std::uint64_t seed) {
  if (steps < 1) throw ConfigError("bench: steps must be >= 1");
  if (obs_dim < 1 || act_dim < 1) throw ConfigError("bench: dims must be >= 1");
  if (archs.empty()) throw ConfigError("bench: need at least one architecture");

  // One shared observation stream so every architecture sees identical inputs.
  Rng obs_rng(seed);
  std::vector<double> stream(static_cast<std::size_t>(steps) * obs_dim);
  for (double& v : stream) v = obs_rng.uniform(-1.0, 1.0);

  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> low(act_dim, -inf);
  const std::vector<double> high(act_dim, inf);

  std::vector<BenchResult> results;
  for (const auto& name : archs) {
    NetworkSpec spec;
    spec.arch = arch_from_string(name);
    spec.k = k;
    spec.g = g;
    Rng init_rng(seed + 1);
    ActorCritic net = build_network(spec, obs_dim, act_dim, init_rng);
    Workspace ws = make_workspace(net);
    std::vector<double> action(act_dim);

    double sink = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int s = 0; s < steps; ++s) {
      const std::span<const double> obs(stream.data() + static_cast<std::size_t>(s) * obs_dim,
                                        static_cast<std::size_t>(obs_dim));
      deterministic_action(net, ws, obs, low, high, action);
      sink += action[0];
    }
    const auto t1 = std::chrono::steady_clock::now();

    BenchResult r;
    r.arch = name;
    r.actor_params = count_params(spec, obs_dim, act_dim).actor;
    r.total_seconds = std::chrono::duration<double>(t1 - t0).count();
    r.per_step_seconds = r.total_seconds / steps;
    r.steps = steps;
    if (!std::isfinite(sink)) throw NumericError("bench: non-finite actor output");
    results.push_back(r);
  }
  return results;
}

// ------------------------------------------------------------------- pruning

namespace {

bool has_kan_layer(const ActorCritic& net) {
  for (const auto& l : net.actor) {
    if (std::holds_alternative<KanLayer>(l)) return true;
  }
  for (const auto& l : net.critic) {
    if (std::holds_alternative<KanLayer>(l)) return true;
  }
  return false;
}

// Unit-normalized observations visited by the deterministic policy.
std::vector<double> collect_probe_obs(const ActorCritic& net, const ObsNormalizer& norm,
                                      Env& env, int episodes, std::uint64_t seed) {
  const EnvDescriptor& d = env.descriptor();
  Workspace ws = make_workspace(net);
  std::vector<double> x(d.obs_dim);
  std::vector<double> action(d.act_dim);
  std::vector<double> probe;
  for (int e = 0; e < episodes; ++e) {
    std::uint64_t mix = seed ^ 0xB10BULL;
    Rng::splitmix64(mix);
    mix ^= static_cast<std::uint64_t>(e) * 0x9e3779b97f4a7c15ULL;
    auto obs = env.reset(Rng::splitmix64(mix));
    while (true) {
      norm.unit(obs, x);
      probe.insert(probe.end(), x.begin(), x.end());
      deterministic_action(net, ws, x, d.action_low, d.action_high, action);
      const StepResult sr = env.step(action);
      if (sr.terminated || sr.truncated) break;
      obs = sr.obs;
    }
  }
  return probe;
}

}  // namespace

PruneOutcome cmd_prune(const fs::path& checkpoint_path, double threshold,
                       int probe_episodes, int eval_episodes, std::uint64_t eval_seed,
                       const fs::path& out_path) {
  if (probe_episodes < 1) throw ConfigError("prune: probe_episodes must be >= 1");
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (!has_kan_layer(ckpt.net)) {
    throw ConfigError("nothing to prune: checkpoint has no KAN layers");
  }
  ckpt.normalizer.freeze();
  auto env = make_env(ckpt.env_name, 0);

  const std::vector<double> probe =
      collect_probe_obs(ckpt.net, ckpt.normalizer, *env, probe_episodes, eval_seed);
  const int batch = static_cast<int>(probe.size()) / ckpt.net.obs_dim;

  PruneOutcome outcome;
  outcome.eval_before = evaluate(ckpt.net, ckpt.normalizer, *env, eval_episodes, eval_seed);

  if (std::isnan(threshold)) {
    // Auto mode: largest percentile threshold that removes >= 10% of edges
    // while keeping mean return within 20% of the unpruned policy.
    outcome.auto_selected = true;
    const std::vector<double> imps = edge_importances(ckpt.net, probe, batch);
    const double floor_return =
        outcome.eval_before.mean_return - 0.2 * std::abs(outcome.eval_before.mean_return);
    bool found = false;
    for (int pct = 50; pct >= 10 && !found; pct -= 5) {
      const std::size_t idx =
          std::min(imps.size() - 1, imps.size() * static_cast<std::size_t>(pct) / 100);
      const double cand = std::nextafter(imps[idx], std::numeric_limits<double>::max());
      ActorCritic trial = ckpt.net;
      const PruneReport rep = prune(trial, probe, batch, cand);
      if (rep.edges_pruned * 10 < rep.edges_total) continue;  // < 10% removed
      const EvalReport ev = evaluate(trial, ckpt.normalizer, *env, eval_episodes, eval_seed);
      if (ev.mean_return >= floor_return) {
        ckpt.net = std::move(trial);
        outcome.report = rep;
        outcome.eval_after = ev;
        found = true;
      }
    }
    if (!found) {
      throw NumericError("prune: no threshold met the 10% removal / 20% degradation bounds");
    }
  } else {
    outcome.report = prune(ckpt.net, probe, batch, threshold);
    outcome.eval_after = evaluate(ckpt.net, ckpt.normalizer, *env, eval_episodes, eval_seed);
  }

  outcome.out_path = out_path;
  save_checkpoint(out_path, ckpt);
  return outcome;
}

// ----------------------------------------------------------------- plot data

std::map<std::string, std::vector<CurvePoint>> cmd_plot_data(const fs::path& metrics_dir,
                                                             const fs::path& out_dir) {
  if (!fs::is_directory(metrics_dir)) {
    throw ConfigError("plot-data: not a directory: " + metrics_dir.string());
  }
  // group key "{env}_{arch}" -> env_step -> returns across seeds
  std::map<std::string, std::map<long long, std::vector<double>>> grouped;
  for (const auto& entry : fs::directory_iterator(metrics_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const auto seed_pos = name.rfind("_seed");
    if (seed_pos == std::string::npos || name.size() < 4 ||
        name.substr(name.size() - 4) != ".csv") {
      continue;
    }
    const std::string key = name.substr(0, seed_pos);
    const auto rows = metrics_from_csv(read_text_file(entry.path()));
    for (const auto& r : rows) grouped[key][r.env_step].push_back(r.mean_return);
  }
  if (grouped.empty()) {
    throw ConfigError("plot-data: no metrics CSVs found in " + metrics_dir.string());
  }

  fs::create_directories(out_dir);
  std::map<std::string, std::vector<CurvePoint>> curves;
  for (const auto& [key, steps] : grouped) {
    std::vector<CurvePoint>& pts = curves[key];
    std::string csv = "env_step,mean_return,std_return\n";
    for (const auto& [step, vals] : steps) {
      CurvePoint p;
      p.env_step = step;
      p.seeds = static_cast<int>(vals.size());
      for (double v : vals) p.mean_return += v;
      p.mean_return /= p.seeds;
      for (double v : vals) {
        p.std_return += (v - p.mean_return) * (v - p.mean_return);
      }
      p.std_return = std::sqrt(p.std_return / p.seeds);
      pts.push_back(p);
      csv += std::to_string(p.env_step);
      csv += ',';
      csv += format_double(p.mean_return);
      csv += ',';
      csv += format_double(p.std_return);
      csv += '\n';
    }
    atomic_write_text(out_dir / (key + "_curve.csv"), csv);
  }
  return curves;
}

}  // namespace kanppo
