#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "kanppo/errors.hpp"
#include "kanppo/rng.hpp"
#include "kanppo/rollout.hpp"

using namespace kanppo;

namespace {

RolloutBuffer random_buffer(int T, Rng& rng, double p_term = 0.15,
                            double p_trunc = 0.1) {
  RolloutBuffer buf = RolloutBuffer::make(T, 1, 1);
  for (int t = 0; t < T; ++t) {
    const double o = rng.uniform(-1, 1), a = rng.uniform(-1, 1);
    const bool term = rng.uniform() < p_term;
    const bool trunc = !term && rng.uniform() < p_trunc;
    buf.push({&o, 1}, {&a, 1}, rng.uniform(-2, 2), term, trunc, rng.uniform(-1, 1),
             rng.uniform(-3, 0));
  }
  buf.bootstrap_value = rng.uniform(-1, 1);
  return buf;
}

// Independent O(T^2) oracle: expand the recursion into the explicit
// discounted sum of TD errors, each path gated by the terminations crossed.
std::vector<double> brute_force_gae(const RolloutBuffer& buf, double gamma,
                                    double lambda) {
  const int T = buf.size;
  std::vector<double> delta(T);
  for (int t = 0; t < T; ++t) {
    const double v_next = (t + 1 < T) ? buf.values[t + 1] : buf.bootstrap_value;
    const double cont = buf.terminated[t] ? 0.0 : 1.0;
    delta[t] = buf.rewards[t] + gamma * v_next * cont - buf.values[t];
  }
  std::vector<double> adv(T);
  for (int t = 0; t < T; ++t) {
    double acc = 0.0, weight = 1.0;
    for (int l = t; l < T; ++l) {
      acc += weight * delta[l];
      weight *= gamma * lambda * (buf.terminated[l] ? 0.0 : 1.0);
      if (weight == 0.0) break;
    }
    adv[t] = acc;
  }
  return adv;
}

}  // namespace

TEST_CASE("td_error pinned examples") {
  // delta = r + gamma * v_next - v: 0 + 0.99*2 - 0.01 = 1.97.
  CHECK(td_error(0.0, 0.01, 2.0, false, 0.99) == doctest::Approx(1.97).epsilon(1e-12));
  // Termination removes the bootstrap term entirely.
  CHECK(td_error(0.0, 0.01, 2.0, true, 0.99) == doctest::Approx(-0.01).epsilon(1e-12));
  CHECK(td_error(1.0, 0.5, 2.0, false, 0.99) == doctest::Approx(2.48).epsilon(1e-12));
  CHECK(td_error(1.0, 0.5, 2.0, true, 0.99) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("compute_gae equals the brute-force double sum") {
  Rng rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 1 + static_cast<int>(rng.below(64));
    const double gamma = rng.uniform(0.8, 1.0);
    const double lambda = rng.uniform(0.0, 1.0);
    RolloutBuffer buf = random_buffer(T, rng);

    const AdvantageBatch batch = compute_gae(buf, gamma, lambda);
    const std::vector<double> expect = brute_force_gae(buf, gamma, lambda);
    REQUIRE(batch.advantages.size() == static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      CHECK(std::abs(batch.advantages[t] - expect[t]) <= 1e-12);
      // returns are value targets: A_t + V(s_t).
      CHECK(std::abs(batch.returns[t] - (expect[t] + buf.values[t])) <= 1e-12);
    }
  }
}

TEST_CASE("lambda = 0 collapses GAE to one-step TD errors") {
  Rng rng(7);
  RolloutBuffer buf = random_buffer(32, rng);
  const AdvantageBatch batch = compute_gae(buf, 0.99, 0.0);
  for (int t = 0; t < 32; ++t) {
    const double v_next = (t + 1 < 32) ? buf.values[t + 1] : buf.bootstrap_value;
    const double expect = td_error(buf.rewards[t], buf.values[t], v_next,
                                   buf.terminated[t] != 0, 0.99);
    CHECK(batch.advantages[t] == expect);  // exact: same arithmetic
  }
}

TEST_CASE("lambda = 1 telescopes to discounted returns minus values") {
  // Without terminations, A_t + V(s_t) must equal the discounted reward sum
  // bootstrapped with V(s_T).
  Rng rng(8);
  RolloutBuffer buf = random_buffer(16, rng, 0.0, 0.0);
  const double gamma = 0.97;
  const AdvantageBatch batch = compute_gae(buf, gamma, 1.0);
  for (int t = 0; t < 16; ++t) {
    double ret = 0.0, disc = 1.0;
    for (int l = t; l < 16; ++l) {
      ret += disc * buf.rewards[l];
      disc *= gamma;
    }
    ret += disc * buf.bootstrap_value;
    CHECK(batch.advantages[t] + buf.values[t] == doctest::Approx(ret).epsilon(1e-12));
  }
}

TEST_CASE("terminated steps isolate everything after them") {
  Rng rng(9);
  RolloutBuffer a = random_buffer(24, rng, 0.0, 0.0);
  a.terminated[10] = 1;

  // Same prefix, arbitrarily different suffix after the termination.
  RolloutBuffer b = a;
  for (int t = 11; t < 24; ++t) {
    b.rewards[t] += 100.0;
    b.values[t] -= 3.0;
  }
  b.bootstrap_value = 55.5;

  const AdvantageBatch ba = compute_gae(a, 0.99, 0.95);
  const AdvantageBatch bb = compute_gae(b, 0.99, 0.95);
  for (int t = 0; t <= 10; ++t) {
    CHECK(ba.advantages[t] == bb.advantages[t]);
  }
  // ... and the suffix genuinely differs, so the check is not vacuous.
  CHECK(ba.advantages[11] != bb.advantages[11]);
}

TEST_CASE("mid-buffer truncation bootstraps through the stored next value") {
  // A truncated step keeps the recursion alive: the value stored at t+1 (the
  // reset observation's value) acts as the bootstrap. Changing it must change
  // the advantage at t.
  Rng rng(10);
  RolloutBuffer a = random_buffer(8, rng, 0.0, 0.0);
  a.truncated[3] = 1;
  RolloutBuffer b = a;
  b.values[4] += 1.0;

  const AdvantageBatch ba = compute_gae(a, 0.99, 0.95);
  const AdvantageBatch bb = compute_gae(b, 0.99, 0.95);
  CHECK(ba.advantages[3] != bb.advantages[3]);
}

TEST_CASE("compute_gae rejects an empty buffer") {
  RolloutBuffer buf = RolloutBuffer::make(4, 1, 1);
  CHECK_THROWS_AS(compute_gae(buf, 0.99, 0.95), ConfigError);
}

TEST_CASE("normalize_advantages pinned example and properties") {
  AdvantageBatch batch;
  batch.advantages = {1.0, 2.0, 3.0};
  batch.returns = {5.0, 6.0, 7.0};
  normalize_advantages(batch);
  // Population std of {1,2,3} is sqrt(2/3); (1-2)/sqrt(2/3) = -1.22474...
  CHECK(batch.advantages[0] == doctest::Approx(-1.2247448).epsilon(1e-6));
  CHECK(batch.advantages[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(batch.advantages[2] == doctest::Approx(1.2247448).epsilon(1e-6));
  // returns untouched
  CHECK(batch.returns[0] == 5.0);

  AdvantageBatch constant;
  constant.advantages = {4.2, 4.2, 4.2, 4.2};
  constant.returns = {0, 0, 0, 0};
  normalize_advantages(constant);
  for (double a : constant.advantages) {
    CHECK(std::abs(a) < 1e-6);  // zeros up to the 1e-8 stabilizer
  }

  AdvantageBatch single;
  single.advantages = {1.0};
  single.returns = {1.0};
  CHECK_THROWS_AS(normalize_advantages(single), ConfigError);
}

TEST_CASE("normalize_advantages output has zero mean and unit variance") {
  Rng rng(12);
  AdvantageBatch batch;
  for (int i = 0; i < 257; ++i) {
    batch.advantages.push_back(rng.uniform(-10, 3));
    batch.returns.push_back(0.0);
  }
  normalize_advantages(batch);
  double mean = 0.0;
  for (double a : batch.advantages) mean += a;
  mean /= 257;
  double var = 0.0;
  for (double a : batch.advantages) var += (a - mean) * (a - mean);
  var /= 257;
  CHECK(std::abs(mean) < 1e-12);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("minibatch_epoch covers every index exactly once") {
  Rng rng(13);
  for (const auto& [T, M] : {std::pair{2048, 64}, {10, 3}, {7, 7}, {5, 1}}) {
    const auto batches = minibatch_epoch(T, M, rng);
    CHECK(static_cast<int>(batches.size()) == (T + M - 1) / M);
    std::set<int> seen;
    int total = 0;
    for (const auto& b : batches) {
      CHECK(static_cast<int>(b.size()) <= M);
      for (int idx : b) {
        CHECK(idx >= 0);
        CHECK(idx < T);
        seen.insert(idx);
        ++total;
      }
    }
    CHECK(total == T);
    CHECK(static_cast<int>(seen.size()) == T);
  }
}

TEST_CASE("minibatch_epoch shuffles deterministically by seed") {
  Rng a(99), b(99), c(100);
  const auto ba = minibatch_epoch(64, 16, a);
  const auto bb = minibatch_epoch(64, 16, b);
  const auto bc = minibatch_epoch(64, 16, c);
  CHECK(ba == bb);
  CHECK(ba != bc);
  CHECK_THROWS_AS(minibatch_epoch(4, 5, a), ConfigError);
  CHECK_THROWS_AS(minibatch_epoch(4, 0, a), ConfigError);
}

TEST_CASE("RolloutBuffer push guards") {
  RolloutBuffer buf = RolloutBuffer::make(2, 1, 1);
  const double o = 0.0, a = 0.0;
  buf.push({&o, 1}, {&a, 1}, 1.0, false, false, 0.0, 0.0);
  CHECK_THROWS_AS(buf.push({&o, 1}, {&a, 1}, 1.0, true, true, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(
      buf.push({&o, 1}, {&a, 1}, std::numeric_limits<double>::quiet_NaN(), false,
               false, 0.0, 0.0),
      NumericError);
  buf.push({&o, 1}, {&a, 1}, 1.0, false, false, 0.0, 0.0);
  CHECK(buf.full());
  CHECK_THROWS_AS(buf.push({&o, 1}, {&a, 1}, 1.0, false, false, 0.0, 0.0), ConfigError);

  buf.clear();
  CHECK(buf.size == 0);
  CHECK_FALSE(buf.full());
}
