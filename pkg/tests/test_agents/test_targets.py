import numpy as np
import pytest

from hedgebench.agents import (
    critic_input,
    ddpg_target,
    double_dql_target,
    dql_target,
    dueling_aggregate,
    ppo_clip_objective,
    td3_target,
)
from hedgebench.numcore import RngStream


@pytest.fixture
def batch():
    rng = np.random.default_rng(17)
    return {
        "rewards": -rng.uniform(size=32),
        "dones": (rng.uniform(size=32) < 0.3).astype(float),
        "next_states": rng.uniform(size=(32, 3)),
    }


def _linear(seed, n_out):
    w = np.random.default_rng(seed).normal(size=(3, n_out))
    return lambda s: np.atleast_2d(s) @ w


def _critic(seed):
    w = np.random.default_rng(seed).normal(size=(4, 1))
    return lambda x: x @ w


def _actor(s):
    return 1.0 / (1.0 + np.exp(-np.atleast_2d(s) @ np.array([1.0, -2.0, 0.5])))


def test_dql_target_matches_loop(batch):
    q = _linear(1, 5)
    y = dql_target(batch["rewards"], batch["dones"], batch["next_states"], q, 0.9)
    for i in range(32):
        q_next = q(batch["next_states"][i])[0]
        expected = batch["rewards"][i] + (1 - batch["dones"][i]) * 0.9 * max(q_next)
        assert abs(y[i] - expected) < 1e-12


def test_double_target_with_identical_nets(batch):
    q = _linear(2, 5)
    args = (batch["rewards"], batch["dones"], batch["next_states"])
    np.testing.assert_array_equal(double_dql_target(*args, q, q), dql_target(*args, q))


def test_double_target_uses_online_argmax(batch):
    online, target = _linear(3, 5), _linear(4, 5)
    args = (batch["rewards"], batch["dones"], batch["next_states"])
    y = double_dql_target(*args, online, target)
    for i in range(32):
        s = batch["next_states"][i]
        best = np.argmax(online(s)[0])
        expected = batch["rewards"][i] + (1 - batch["dones"][i]) * target(s)[0][best]
        assert abs(y[i] - expected) < 1e-12


def test_terminal_transitions_return_reward(batch):
    done = np.ones(32)
    y = dql_target(batch["rewards"], done, batch["next_states"], _linear(5, 5))
    np.testing.assert_array_equal(y, batch["rewards"])
    y = ddpg_target(batch["rewards"], done, batch["next_states"], _actor, _critic(6))
    np.testing.assert_array_equal(y, batch["rewards"])


def test_dueling_aggregate():
    q = dueling_aggregate(2.0, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(q, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(dueling_aggregate(2.0, [11.0, 12.0, 13.0]), q)
    batch = dueling_aggregate(np.array([0.0, 1.0]), np.array([[1.0, -1.0], [0.0, 2.0]]))
    np.testing.assert_allclose(batch, [[1.0, -1.0], [0.0, 2.0]])
    np.testing.assert_allclose(batch.mean(axis=1), [0.0, 1.0])


@pytest.mark.parametrize(
    "ratio,advantage,expected",
    [
        (1.0, 0.7, 0.7),
        (1.5, 1.0, 1.2),
        (0.5, 1.0, 0.5),
        (0.5, -1.0, -0.8),
        (1.5, -1.0, -1.5),
    ],
)
def test_ppo_clip_objective(ratio, advantage, expected):
    assert ppo_clip_objective(ratio, advantage, 0.2) == pytest.approx(expected)


def test_critic_input():
    x = critic_input(np.ones((2, 3)), [0.1, 0.2])
    np.testing.assert_array_equal(x, [[1, 1, 1, 0.1], [1, 1, 1, 0.2]])


def test_ddpg_target_matches_loop(batch):
    q = _critic(7)
    y = ddpg_target(batch["rewards"], batch["dones"], batch["next_states"], _actor, q)
    for i in range(32):
        s = batch["next_states"][i]
        a = _actor(s)[0]
        q_next = q(np.append(s, a)[None, :])[0, 0]
        expected = batch["rewards"][i] + (1 - batch["dones"][i]) * q_next
        assert abs(y[i] - expected) < 1e-12


def test_td3_without_noise_reduces_to_ddpg(batch):
    q = _critic(8)
    args = (batch["rewards"], batch["dones"], batch["next_states"], _actor)
    expected = ddpg_target(*args, q)
    np.testing.assert_array_equal(td3_target(*args, q, q), expected)
    zero_noise = td3_target(
        *args, q, q, noise_spec=(0.0, 0.25), stream=RngStream(0, 2)
    )
    np.testing.assert_array_equal(zero_noise, expected)


def test_td3_takes_minimum_of_twins(batch):
    q1, q2 = _critic(9), _critic(10)
    args = (batch["rewards"], batch["dones"], batch["next_states"], _actor)
    y = td3_target(*args, q1, q2)
    lower = np.minimum(ddpg_target(*args, q1), ddpg_target(*args, q2))
    np.testing.assert_allclose(y, lower, rtol=0, atol=1e-12)


def test_td3_noise_is_clipped(batch):
    q = _critic(11)
    args = (batch["rewards"], batch["dones"], batch["next_states"], _actor)
    noisy = td3_target(*args, q, q, noise_spec=(10.0, 0.05), stream=RngStream(1, 2))
    # the smoothed action moves by at most the clip value
    w = 0.05 * np.abs(np.random.default_rng(11).normal(size=(4, 1))[3, 0])
    np.testing.assert_array_less(
        np.abs(noisy - ddpg_target(*args, q)), w * (1 - batch["dones"]) + 1e-12
    )
