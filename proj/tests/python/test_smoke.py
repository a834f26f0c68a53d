"""End-to-end smoke tests for the Python bindings.

Deep numerical verification lives in the C++ suite; these check that the
bound surface behaves sensibly and agrees with numpy re-implementations on
small cases.
"""
import json
import math
import tempfile
from pathlib import Path

import numpy as np

import kanppo


def test_module_surface():
    assert set(kanppo.arch_names()) == {"full-kan", "kan-actor", "mlp-a2c2", "mlp-a1c2"}
    assert set(kanppo.env_names()) == {
        "point-reacher",
        "pendulum-swingup",
        "cartpole-continuous",
    }


def test_basis_partition_of_unity():
    rng = np.random.default_rng(0)
    for k, g in [(1, 3), (2, 3), (3, 5)]:
        for x in rng.uniform(-1, 1, size=50):
            values = kanppo.basis_values(k, g, float(x))
            assert values.shape == (g + k,)
            assert np.all(values >= 0)
            assert abs(values.sum() - 1.0) < 1e-10
            # Derivatives of a partition of unity sum to zero.
            deriv = kanppo.basis_derivatives(k, g, float(x))
            assert abs(deriv.sum()) < 1e-9


def test_eval_spline_constant():
    coeffs = np.full(5, 2.5)  # g + k = 3 + 2
    for x in np.linspace(-1, 1, 11):
        assert abs(kanppo.eval_spline(coeffs, 2, 3, float(x)) - 2.5) < 1e-12


def test_count_params_published_values():
    assert kanppo.count_params("kan-actor", 17, 6) == (510, 5377)
    assert kanppo.count_params("mlp-a2c2", 17, 6) == (5702, 5377)
    assert kanppo.count_params("mlp-a1c2", 17, 6) == (1542, 5377)
    assert kanppo.count_params("full-kan", 17, 6) == (510, 85)
    table = kanppo.param_table()
    assert "halfcheetah" in table and "average" in table


def test_ppo_algebra():
    assert kanppo.ratio(-1.5, -1.5) == 1.0
    assert abs(kanppo.ratio(-1.4, -1.5) - math.exp(0.1)) < 1e-12
    assert kanppo.clip_objective(1.0, 2.5, 0.2) == 2.5
    assert abs(kanppo.clip_objective(1.3, 1.0, 0.2) - 1.2) < 1e-15
    assert abs(kanppo.clip_objective(0.7, -1.0, 0.2) - (-0.8)) < 1e-15
    assert abs(kanppo.td_error(1.0, 0.5, 2.0, False, 0.99) - (1.0 + 1.98 - 0.5)) < 1e-12


def test_compute_gae_against_numpy():
    rng = np.random.default_rng(7)
    T, gamma, lam = 16, 0.97, 0.9
    rewards = rng.uniform(-1, 1, T)
    values = rng.uniform(-1, 1, T)
    terminated = [False] * T
    terminated[5] = True
    bootstrap = 0.4

    adv, ret = kanppo.compute_gae(rewards, values, terminated, bootstrap, gamma, lam)

    # Brute-force double sum.
    v_next = np.append(values[1:], bootstrap)
    deltas = rewards + gamma * v_next * (1.0 - np.array(terminated, float)) - values
    expected = np.zeros(T)
    for t in range(T):
        w = 1.0
        for l in range(t, T):
            expected[t] += w * deltas[l]
            w *= gamma * lam * (0.0 if terminated[l] else 1.0)
            if w == 0.0:
                break
    assert np.max(np.abs(adv - expected)) < 1e-12
    assert np.max(np.abs(ret - (adv + values))) < 1e-12


def test_environment_stepping():
    env = kanppo.Environment("pendulum-swingup", seed=3)
    assert env.obs_dim == 3 and env.act_dim == 1
    assert env.max_episode_steps == 200
    obs = env.reset(seed=11)
    assert obs.shape == (3,)
    obs2, reward, terminated, truncated = env.step(np.array([1.0]))
    assert obs2.shape == (3,)
    assert math.isfinite(reward) and reward <= 0.0
    assert not terminated and not truncated
    # Same seed, same episode.
    again = kanppo.Environment("pendulum-swingup", seed=99)
    assert np.array_equal(again.reset(seed=11), obs)


def test_network_forward_and_prune():
    net = kanppo.Network("full-kan", obs_dim=4, act_dim=2, k=2, g=3, seed=5)
    assert net.param_count == (2 * 4 * 5, 4 * 5)
    obs = np.array([0.1, -0.2, 0.3, 0.9])
    mean = net.actor_mean(obs)
    assert mean.shape == (2,)
    assert np.isfinite(net.value(obs))
    act = net.action(obs, low=-1.0, high=1.0)
    assert np.all(act <= 1.0) and np.all(act >= -1.0)

    params = net.get_params()
    net.set_params(params * 2.0)
    assert np.allclose(net.actor_mean(obs), 2.0 * mean, atol=1e-12)

    probe = np.random.default_rng(1).uniform(-1, 1, size=(32, 4))
    imps = net.edge_importances(probe)
    assert imps.shape == (2 * 4 + 4 * 1,)
    report = net.prune(probe, float(np.median(imps)))
    assert report["edges_total"] == 12
    assert 0 < report["edges_pruned"] < 12
    assert net.active_params < report["params_before"]


def test_random_baseline_cartpole():
    mean, std = kanppo.random_baseline("cartpole-continuous", episodes=20)
    assert 0.0 < mean < 500.0
    assert std >= 0.0


def test_train_run_and_eval_roundtrip():
    result = kanppo.train_run(
        0,
        env="point-reacher",
        arch="kan-actor",
        total_steps=512,
        horizon=256,
        minibatch=64,
        epochs=2,
    )
    assert result["seed"] == 0
    assert result["env_steps"] == 512
    assert len(result["metrics"]) == 2
    assert result["metrics"][-1]["env_step"] == 512

    ckpt = json.loads(result["checkpoint_json"])
    assert ckpt["format"] == "kanppo-checkpoint-v1"

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "smoke.checkpoint.json"
        path.write_text(result["checkpoint_json"])
        mean, std = kanppo.eval_checkpoint(str(path), episodes=5, seed=99)
        assert math.isfinite(mean) and std >= 0.0
        # Determinism of evaluation.
        assert kanppo.eval_checkpoint(str(path), episodes=5, seed=99) == (mean, std)


def test_errors_map_to_python_exceptions():
    try:
        kanppo.Environment("atari-pong")
        raise AssertionError("expected ValueError")
    except ValueError:
        pass
    try:
        kanppo.count_params("resnet", 4, 2)
        raise AssertionError("expected ValueError")
    except ValueError:
        pass
