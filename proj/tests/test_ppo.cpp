#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "kanppo/errors.hpp"
#include "kanppo/grad_check.hpp"
#include "kanppo/network.hpp"
#include "kanppo/policy.hpp"
#include "kanppo/ppo.hpp"
#include "kanppo/rng.hpp"
#include "kanppo/rollout.hpp"

using namespace kanppo;

namespace {

ActorCritic tiny_net(Arch arch, int obs_dim, int act_dim, std::uint64_t seed) {
  NetworkSpec spec;
  spec.arch = arch;
  spec.hidden = 8;
  Rng rng(seed);
  return build_network(spec, obs_dim, act_dim, rng);
}

// Buffer populated by the net's own policy so stored log-probs are exact.
RolloutBuffer on_policy_buffer(ActorCritic& net, Workspace& ws, int T, Rng& rng) {
  RolloutBuffer buf = RolloutBuffer::make(T, net.obs_dim, net.act_dim);
  const std::vector<double> low(net.act_dim, -10.0), high(net.act_dim, 10.0);
  for (int t = 0; t < T; ++t) {
    std::vector<double> obs(net.obs_dim);
    for (auto& o : obs) o = rng.uniform(-1, 1);
    const ActionSample s = sample_action(net, ws, obs, low, high, rng);
    const double value = critic_value(net, ws, obs);
    buf.push(obs, s.action, rng.uniform(-1, 1), false, false, value, s.log_prob);
  }
  buf.bootstrap_value = 0.3;
  return buf;
}

std::vector<int> all_indices(int T) {
  std::vector<int> idx(T);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

TEST_CASE("ratio pinned values and exponent clamp") {
  CHECK(ratio(-1.5, -1.5) == 1.0);
  CHECK(ratio(-1.4, -1.5) == doctest::Approx(std::exp(0.1)).epsilon(1e-12));
  CHECK(ratio(-2.0, -1.5) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  // A 700-nat jump would overflow exp(); the clamp caps it at exp(+-20).
  CHECK(ratio(700.0, 0.0) == doctest::Approx(std::exp(20.0)).epsilon(1e-12));
  CHECK(ratio(-700.0, 0.0) == doctest::Approx(std::exp(-20.0)).epsilon(1e-12));
}

TEST_CASE("clip_objective pinned examples") {
  // Identity at r = 1.
  CHECK(clip_objective(1.0, 2.5, 0.2) == 2.5);
  CHECK(clip_objective(1.0, -0.7, 0.2) == -0.7);
  // Positive advantage: upside capped at (1+eps)*adv.
  CHECK(clip_objective(1.3, 1.0, 0.2) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(clip_objective(0.5, 1.0, 0.2) == doctest::Approx(0.5).epsilon(1e-15));
  // Negative advantage: the min picks the more pessimistic branch.
  CHECK(clip_objective(0.7, -1.0, 0.2) == doctest::Approx(-0.8).epsilon(1e-15));
  CHECK(clip_objective(1.6, -1.0, 0.2) == doctest::Approx(-1.6).epsilon(1e-15));
}

TEST_CASE("clip_objective properties over random triples") {
  Rng rng(321);
  for (int trial = 0; trial < 100000; ++trial) {
    const double r = rng.uniform(0.0, 3.0);
    const double adv = rng.uniform(-2.0, 2.0);
    const double eps = rng.uniform(0.05, 0.5);
    const double obj = clip_objective(r, adv, eps);
    const double clipped = std::clamp(r, 1.0 - eps, 1.0 + eps) * adv;
    // Lower bound: never exceeds either branch, equals one of them.
    CHECK(obj <= r * adv);
    CHECK(obj <= clipped);
    CHECK((obj == r * adv || obj == clipped));
  }
}

TEST_CASE("l_pg pinned value") {
  const std::vector<double> logp = {-1.0, -2.0};
  const std::vector<double> adv = {0.5, -1.0};
  CHECK(l_pg(logp, adv) == doctest::Approx((-0.5 + 2.0) / 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(l_pg({}, {}), ConfigError);
}

TEST_CASE("fresh on-policy minibatch: unit ratios, zero KL, zero clip fraction") {
  ActorCritic net = tiny_net(Arch::kKanActor, 3, 2, 42);
  Workspace ws = make_workspace(net);
  Rng rng(7);
  RolloutBuffer buf = on_policy_buffer(net, ws, 16, rng);
  AdvantageBatch batch = compute_gae(buf, 0.99, 0.95);

  PpoConfig cfg;
  const auto idx = all_indices(16);
  const LossReport rep = combined_loss(net, ws, buf, batch, idx, cfg, false);

  CHECK(std::abs(rep.approx_kl) < 1e-12);
  CHECK(rep.clip_fraction == 0.0);
  double mean_adv = 0.0;
  for (double a : batch.advantages) mean_adv += a;
  mean_adv /= 16;
  CHECK(rep.l_clip == doctest::Approx(mean_adv).epsilon(1e-9).scale(1.0));
  double mean_sq = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double verr = buf.values[i] - batch.returns[i];
    mean_sq += verr * verr;
  }
  CHECK(rep.l_vf == doctest::Approx(mean_sq / 16).epsilon(1e-9).scale(1.0));
  CHECK(rep.total_loss ==
        doctest::Approx(-rep.l_clip + cfg.c1 * rep.l_vf - cfg.c2 * rep.entropy)
            .epsilon(1e-12));
}

TEST_CASE("combined_loss gradients pass finite differences on all archs") {
  PpoConfig cfg;
  cfg.c2 = 0.01;  // exercise the entropy path too
  for (Arch arch : {Arch::kMlpA2C2, Arch::kMlpA1C2, Arch::kKanActor, Arch::kFullKan}) {
    ActorCritic net = tiny_net(arch, 3, 2, 42);
    Workspace ws = make_workspace(net);
    Rng rng(1000 + static_cast<int>(arch));
    RolloutBuffer buf = on_policy_buffer(net, ws, 8, rng);
    // Perturb stored log-probs so ratios are not trivially 1.
    for (auto& lp : buf.log_probs) lp += rng.uniform(-0.1, 0.1);
    AdvantageBatch batch = compute_gae(buf, cfg.gamma, cfg.lambda);
    const auto idx = all_indices(8);

    auto loss_fn = [&](bool with_grad) {
      return combined_loss(net, ws, buf, batch, idx, cfg, with_grad).total_loss;
    };
    CHECK(finite_diff_check(net.params, loss_fn) <= 1e-5);
  }
}

TEST_CASE("zero advantages leave the actor untouched") {
  ActorCritic net = tiny_net(Arch::kKanActor, 2, 1, 5);
  Workspace ws = make_workspace(net);
  Rng rng(3);
  RolloutBuffer buf = RolloutBuffer::make(8, 2, 1);
  for (int t = 0; t < 8; ++t) {
    std::vector<double> obs = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double a = 0.1;
    // Zero rewards and zero values make every TD error (and advantage) zero.
    buf.push(obs, {&a, 1}, 0.0, false, false, 0.0, log_prob(net, ws, obs, {&a, 1}));
  }
  buf.bootstrap_value = 0.0;

  std::vector<double> actor_before;
  const auto actor_snapshot = [&] {
    std::vector<double> snap;
    for (std::size_t s = 0; s < net.params.slice_count(); ++s) {
      const std::string& name = net.params.slice(s).name;
      if (name.rfind("actor.", 0) == 0 || name == "log_std") {
        const auto v = net.params.values(s);
        snap.insert(snap.end(), v.begin(), v.end());
      }
    }
    return snap;
  };
  actor_before = actor_snapshot();

  PpoConfig cfg;
  cfg.minibatch = 4;
  cfg.horizon = 8;
  AdamState opt = AdamState::make(net.params.size(), cfg.lr);
  Rng update_rng(17);
  ppo_update(net, ws, buf, cfg, opt, update_rng);

  CHECK(actor_snapshot() == actor_before);  // bitwise: no actor gradient at all
}

TEST_CASE("ppo_update is deterministic and clamps log_std") {
  auto run_once = [](std::uint64_t seed) {
    ActorCritic net = tiny_net(Arch::kMlpA1C2, 3, 2, 21);
    net.log_std_mut()[0] = 3.5;   // above the clamp ceiling
    net.log_std_mut()[1] = -6.0;  // below the floor
    Workspace ws = make_workspace(net);
    Rng rng(seed);
    RolloutBuffer buf = on_policy_buffer(net, ws, 16, rng);
    PpoConfig cfg;
    cfg.minibatch = 8;
    cfg.horizon = 16;
    cfg.epochs = 2;
    AdamState opt = AdamState::make(net.params.size(), cfg.lr);
    Rng update_rng(seed + 1);
    ppo_update(net, ws, buf, cfg, opt, update_rng);
    return std::vector<double>(net.params.values().begin(), net.params.values().end());
  };

  const auto a = run_once(100);
  const auto b = run_once(100);
  const auto c = run_once(101);
  CHECK(a == b);
  CHECK(a != c);

  // The clamp applies after every step.
  ActorCritic net = tiny_net(Arch::kMlpA1C2, 3, 2, 21);
  net.log_std_mut()[0] = 3.5;
  net.log_std_mut()[1] = -6.0;
  Workspace ws = make_workspace(net);
  Rng rng(100);
  RolloutBuffer buf = on_policy_buffer(net, ws, 16, rng);
  PpoConfig cfg;
  cfg.minibatch = 8;
  cfg.horizon = 16;
  AdamState opt = AdamState::make(net.params.size(), cfg.lr);
  Rng update_rng(5);
  ppo_update(net, ws, buf, cfg, opt, update_rng);
  CHECK(net.log_std()[0] <= 2.0);
  CHECK(net.log_std()[1] >= -5.0);
}

TEST_CASE("ppo_update refuses a partial buffer") {
  ActorCritic net = tiny_net(Arch::kKanActor, 2, 1, 5);
  Workspace ws = make_workspace(net);
  RolloutBuffer buf = RolloutBuffer::make(8, 2, 1);
  PpoConfig cfg;
  AdamState opt = AdamState::make(net.params.size(), cfg.lr);
  Rng rng(0);
  CHECK_THROWS_AS(ppo_update(net, ws, buf, cfg, opt, rng), ConfigError);
}

TEST_CASE("PpoConfig::validate rejects bad fields") {
  const PpoConfig good;
  good.validate();

  auto expect_throw = [](auto mutate) {
    PpoConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  };
  expect_throw([](PpoConfig& c) { c.epsilon = 0.0; });
  expect_throw([](PpoConfig& c) { c.epochs = 0; });
  expect_throw([](PpoConfig& c) { c.minibatch = 0; });
  expect_throw([](PpoConfig& c) { c.minibatch = c.horizon + 1; });
  expect_throw([](PpoConfig& c) { c.gamma = 1.5; });
  expect_throw([](PpoConfig& c) { c.lambda = -0.1; });
  expect_throw([](PpoConfig& c) { c.lr = 0.0; });
  expect_throw([](PpoConfig& c) { c.total_steps = 0; });
  expect_throw([](PpoConfig& c) { c.eval_episodes = 0; });
  expect_throw([](PpoConfig& c) { c.max_grad_norm = -1.0; });
}

TEST_CASE("combined_loss reports a NumericError with component breakdown") {
  ActorCritic net = tiny_net(Arch::kKanActor, 2, 1, 5);
  // Overflow the critic so the squared value error becomes infinite.
  for (std::size_t s = 0; s < net.params.slice_count(); ++s) {
    if (net.params.slice(s).name == "critic.l0.w") {
      for (double& w : net.params.values(s)) w = 1e308;
    }
    if (net.params.slice(s).name == "critic.out.w") {
      for (double& w : net.params.values(s)) w = 1e308;
    }
  }
  Workspace ws = make_workspace(net);
  RolloutBuffer buf = RolloutBuffer::make(4, 2, 1);
  for (int t = 0; t < 4; ++t) {
    std::vector<double> obs = {0.5, 0.5};
    const double a = 0.0;
    buf.push(obs, {&a, 1}, 0.0, false, false, 0.0, 0.0);
  }
  AdvantageBatch batch = compute_gae(buf, 0.99, 0.95);
  PpoConfig cfg;
  const auto idx = all_indices(4);
  CHECK_THROWS_AS(combined_loss(net, ws, buf, batch, idx, cfg, false), NumericError);
  try {
    combined_loss(net, ws, buf, batch, idx, cfg, false);
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("l_vf=") != std::string::npos);
  }
}
