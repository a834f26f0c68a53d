// Python surface for the kanppo core. Thin wrappers only: every numeric
// routine lives in the C++ library and is exercised by the C++ test suite;
// these bindings exist for interactive poking and cross-checking from numpy.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "kanppo/checkpoint.hpp"
#include "kanppo/env.hpp"
#include "kanppo/errors.hpp"
#include "kanppo/harness.hpp"
#include "kanppo/network.hpp"
#include "kanppo/policy.hpp"
#include "kanppo/ppo.hpp"
#include "kanppo/rollout.hpp"
#include "kanppo/spline.hpp"

namespace py = pybind11;
using namespace kanppo;

namespace {

std::span<const double> span_of(const py::array_t<double, py::array::c_style>& a) {
  return {a.data(), static_cast<std::size_t>(a.size())};
}

py::array_t<double> array_of(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

void require_len(const py::array_t<double, py::array::c_style>& a, int n,
                 const char* what) {
  if (a.size() != n) {
    throw ConfigError(std::string(what) + ": expected length " + std::to_string(n) +
                      ", got " + std::to_string(a.size()));
  }
}

// ActorCritic plus its scratch, the unit every method here operates on.
struct PyNetwork {
  ActorCritic net;
  Workspace ws;

  PyNetwork(const std::string& arch, int obs_dim, int act_dim, int k, int g, int hidden,
            std::uint64_t seed) {
    NetworkSpec spec;
    spec.arch = arch_from_string(arch);
    spec.k = k;
    spec.g = g;
    spec.hidden = hidden;
    Rng rng(seed);
    net = build_network(spec, obs_dim, act_dim, rng);
    ws = make_workspace(net);
  }

  py::array_t<double> mean(const py::array_t<double, py::array::c_style>& obs) {
    require_len(obs, net.obs_dim, "obs");
    std::vector<double> out(net.act_dim);
    actor_mean(net, ws, span_of(obs), out);
    return array_of(out);
  }

  double value(const py::array_t<double, py::array::c_style>& obs) {
    require_len(obs, net.obs_dim, "obs");
    return critic_value(net, ws, span_of(obs));
  }

  py::array_t<double> action(const py::array_t<double, py::array::c_style>& obs,
                             double low, double high) {
    require_len(obs, net.obs_dim, "obs");
    std::vector<double> lo(net.act_dim, low), hi(net.act_dim, high);
    std::vector<double> out(net.act_dim);
    deterministic_action(net, ws, span_of(obs), lo, hi, out);
    return array_of(out);
  }

  py::array_t<double> get_params() const {
    const auto v = net.params.values();
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
  }

  void set_params(const py::array_t<double, py::array::c_style>& p) {
    auto v = net.params.values();
    require_len(p, static_cast<int>(v.size()), "params");
    std::copy(p.data(), p.data() + p.size(), v.begin());
  }

  py::dict prune_at(const py::array_t<double, py::array::c_style>& probe,
                    double threshold) {
    if (probe.ndim() != 2 || probe.shape(1) != net.obs_dim) {
      throw ConfigError("probe must be a (batch, obs_dim) array");
    }
    const int batch = static_cast<int>(probe.shape(0));
    const PruneReport rep = prune(net, span_of(probe), batch, threshold);
    py::dict d;
    d["threshold"] = rep.threshold;
    d["params_before"] = rep.params_before;
    d["params_after"] = rep.params_after;
    d["edges_total"] = rep.edges_total;
    d["edges_pruned"] = rep.edges_pruned;
    return d;
  }

  py::array_t<double> importances(const py::array_t<double, py::array::c_style>& probe) {
    if (probe.ndim() != 2 || probe.shape(1) != net.obs_dim) {
      throw ConfigError("probe must be a (batch, obs_dim) array");
    }
    return array_of(edge_importances(net, span_of(probe),
                                     static_cast<int>(probe.shape(0))));
  }
};

// Owns the Env and copies observations out (the C++ spans alias internal
// state, which Python must never see).
struct PyEnv {
  std::unique_ptr<Env> env;

  PyEnv(const std::string& name, std::uint64_t seed) : env(make_env(name, seed)) {}

  const EnvDescriptor& desc() const { return env->descriptor(); }

  py::array_t<double> reset(std::optional<std::uint64_t> seed) {
    const auto obs = seed ? env->reset(*seed) : env->reset();
    return array_of({obs.begin(), obs.end()});
  }

  py::tuple step(const py::array_t<double, py::array::c_style>& action) {
    require_len(action, desc().act_dim, "action");
    const StepResult r = env->step(span_of(action));
    return py::make_tuple(array_of({r.obs.begin(), r.obs.end()}), r.reward,
                          r.terminated, r.truncated);
  }
};

std::string kv_to_string(const py::handle& v) {
  if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
  if (py::isinstance<py::str>(v)) return v.cast<std::string>();
  std::ostringstream os;
  os.precision(17);
  if (py::isinstance<py::int_>(v)) os << v.cast<long long>();
  else if (py::isinstance<py::float_>(v)) os << v.cast<double>();
  else throw ConfigError("config values must be str, bool, int or float");
  return os.str();
}

py::dict train_run(std::uint64_t seed, const py::kwargs& overrides) {
  RunConfig cfg;
  cfg.seeds = {seed};
  for (auto item : overrides) {
    apply_config_kv(cfg, py::str(item.first).cast<std::string>(),
                    kv_to_string(item.second));
  }
  SeedRunResult res;
  {
    py::gil_scoped_release release;
    res = run_seed(cfg, seed);
  }
  py::list rows;
  for (const MetricsRow& r : res.train.metrics) {
    py::dict d;
    d["env_step"] = r.env_step;
    d["mean_return"] = r.mean_return;
    d["l_clip"] = r.l_clip;
    d["l_vf"] = r.l_vf;
    d["entropy"] = r.entropy;
    d["approx_kl"] = r.approx_kl;
    d["clip_fraction"] = r.clip_fraction;
    rows.append(d);
  }
  py::dict out;
  out["seed"] = res.seed;
  out["env_steps"] = res.train.env_steps;
  out["metrics"] = rows;
  out["checkpoint_json"] = checkpoint_to_json(res.checkpoint);
  return out;
}

}  // namespace

PYBIND11_MODULE(_kanppo, m) {
  m.doc() = "Kolmogorov-Arnold networks + PPO, C++ core bindings";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  // ---- splines
  m.def(
      "basis_values",
      [](int k, int g, double x) {
        return array_of(basis_values(KnotGrid::uniform(k, g), x));
      },
      py::arg("k"), py::arg("g"), py::arg("x"),
      "All g+k B-spline basis values N_i(x) on the [-1,1] grid");
  m.def(
      "basis_derivatives",
      [](int k, int g, double x) {
        return array_of(basis_derivatives(KnotGrid::uniform(k, g), x));
      },
      py::arg("k"), py::arg("g"), py::arg("x"));
  m.def(
      "eval_spline",
      [](const py::array_t<double, py::array::c_style>& coeffs, int k, int g, double x) {
        return eval_spline(span_of(coeffs), KnotGrid::uniform(k, g), x);
      },
      py::arg("coeffs"), py::arg("k"), py::arg("g"), py::arg("x"));

  // ---- PPO algebra
  m.def("ratio", &ratio, py::arg("logp_new"), py::arg("logp_old"));
  m.def("clip_objective", &clip_objective, py::arg("r"), py::arg("adv"),
        py::arg("epsilon"));
  m.def("td_error", &td_error, py::arg("r_t"), py::arg("v_t"), py::arg("v_next"),
        py::arg("terminal"), py::arg("gamma"));
  m.def(
      "compute_gae",
      [](const py::array_t<double, py::array::c_style>& rewards,
         const py::array_t<double, py::array::c_style>& values,
         const std::vector<bool>& terminated, double bootstrap_value, double gamma,
         double lambda) {
        const int T = static_cast<int>(rewards.size());
        if (static_cast<int>(values.size()) != T ||
            static_cast<int>(terminated.size()) != T) {
          throw ConfigError("compute_gae: rewards, values, terminated must share length");
        }
        RolloutBuffer buf = RolloutBuffer::make(T, 1, 1);
        for (int t = 0; t < T; ++t) {
          const double o = 0.0, a = 0.0;
          buf.push({&o, 1}, {&a, 1}, rewards.at(t), terminated[t], false, values.at(t),
                   0.0);
        }
        buf.bootstrap_value = bootstrap_value;
        AdvantageBatch b = compute_gae(buf, gamma, lambda);
        return py::make_tuple(array_of(b.advantages), array_of(b.returns));
      },
      py::arg("rewards"), py::arg("values"), py::arg("terminated"),
      py::arg("bootstrap_value") = 0.0, py::arg("gamma") = 0.99,
      py::arg("lambda_") = 0.95,
      "(advantages, returns) via the backward GAE recursion");

  // ---- parameter counting
  m.def(
      "count_params",
      [](const std::string& arch, int obs_dim, int act_dim, int k, int g, int hidden) {
        NetworkSpec spec;
        spec.arch = arch_from_string(arch);
        spec.k = k;
        spec.g = g;
        spec.hidden = hidden;
        const ParamCounts c = count_params(spec, obs_dim, act_dim);
        return py::make_tuple(c.actor, c.critic);
      },
      py::arg("arch"), py::arg("obs_dim"), py::arg("act_dim"), py::arg("k") = 2,
      py::arg("g") = 3, py::arg("hidden") = 64,
      "(actor, critic) learnable parameter counts, log_std excluded");
  m.def(
      "param_table",
      [](int k, int g, int hidden) {
        return format_param_table(make_param_table(k, g, hidden));
      },
      py::arg("k") = 2, py::arg("g") = 3, py::arg("hidden") = 64);

  m.def("arch_names", [] { return arch_names(); });
  m.def("env_names", [] { return env_names(); });

  // ---- networks
  py::class_<PyNetwork>(m, "Network")
      .def(py::init<const std::string&, int, int, int, int, int, std::uint64_t>(),
           py::arg("arch"), py::arg("obs_dim"), py::arg("act_dim"), py::arg("k") = 2,
           py::arg("g") = 3, py::arg("hidden") = 64, py::arg("seed") = 0)
      .def_property_readonly("arch",
                             [](const PyNetwork& n) {
                               return std::string(arch_name(n.net.spec.arch));
                             })
      .def_property_readonly("obs_dim", [](const PyNetwork& n) { return n.net.obs_dim; })
      .def_property_readonly("act_dim", [](const PyNetwork& n) { return n.net.act_dim; })
      .def_property_readonly("param_count",
                             [](const PyNetwork& n) {
                               const ParamCounts c =
                                   count_params(n.net.spec, n.net.obs_dim, n.net.act_dim);
                               return py::make_tuple(c.actor, c.critic);
                             })
      .def_property_readonly(
          "active_params", [](const PyNetwork& n) { return active_param_count(n.net); })
      .def_property_readonly("log_std",
                             [](const PyNetwork& n) {
                               const auto v = n.net.log_std();
                               return array_of({v.begin(), v.end()});
                             })
      .def("actor_mean", &PyNetwork::mean, py::arg("obs"))
      .def("value", &PyNetwork::value, py::arg("obs"))
      .def("action", &PyNetwork::action, py::arg("obs"),
           py::arg("low") = -std::numeric_limits<double>::infinity(),
           py::arg("high") = std::numeric_limits<double>::infinity())
      .def("get_params", &PyNetwork::get_params)
      .def("set_params", &PyNetwork::set_params, py::arg("params"))
      .def("prune", &PyNetwork::prune_at, py::arg("probe_obs"), py::arg("threshold"))
      .def("edge_importances", &PyNetwork::importances, py::arg("probe_obs"));

  // ---- environments
  py::class_<PyEnv>(m, "Environment")
      .def(py::init<const std::string&, std::uint64_t>(), py::arg("name"),
           py::arg("seed") = 0)
      .def_property_readonly("name", [](const PyEnv& e) { return e.desc().name; })
      .def_property_readonly("obs_dim", [](const PyEnv& e) { return e.desc().obs_dim; })
      .def_property_readonly("act_dim", [](const PyEnv& e) { return e.desc().act_dim; })
      .def_property_readonly("action_low",
                             [](const PyEnv& e) { return array_of(e.desc().action_low); })
      .def_property_readonly(
          "action_high", [](const PyEnv& e) { return array_of(e.desc().action_high); })
      .def_property_readonly(
          "max_episode_steps",
          [](const PyEnv& e) { return e.desc().max_episode_steps; })
      .def("reset", &PyEnv::reset, py::arg("seed") = py::none())
      .def("step", &PyEnv::step, py::arg("action"),
           "(obs, reward, terminated, truncated)");

  m.def(
      "random_baseline",
      [](const std::string& name, int episodes, std::uint64_t env_seed,
         std::uint64_t rng_seed) {
        auto env = make_env(name, env_seed);
        Rng rng(rng_seed);
        const BaselineReport rep = random_policy_baseline(*env, episodes, rng);
        return py::make_tuple(rep.mean_return, rep.std_return);
      },
      py::arg("env"), py::arg("episodes") = 100, py::arg("env_seed") = 7,
      py::arg("rng_seed") = 123,
      "(mean, std) undiscounted return of a uniform-random policy");

  // ---- training / evaluation
  m.def("train_run", &train_run, py::arg("seed"),
        "Train one seed; config keys as keyword arguments (see the config-file "
        "grammar). Returns metrics rows and the checkpoint JSON.");
  m.def(
      "eval_checkpoint",
      [](const std::string& path, int episodes, std::uint64_t seed) {
        EvalReport rep;
        {
          py::gil_scoped_release release;
          rep = cmd_eval(path, episodes, seed);
        }
        return py::make_tuple(rep.mean_return, rep.std_return);
      },
      py::arg("path"), py::arg("episodes") = 100, py::arg("seed") = 99);
}
