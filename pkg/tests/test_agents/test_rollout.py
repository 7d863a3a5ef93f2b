import numpy as np

from hedgebench.agents.rollout import ParallelEpisodes
from hedgebench.hedging import hedge_batch, reward


def test_episodes_match_batch_hedging(small_pathset, env_config, constant):
    envs = ParallelEpisodes(small_pathset, env_config, 8, np.random.default_rng(0))
    paths = envs.path_idx.copy()
    for t in range(12):
        states, rewards, next_states, dones = envs.step(np.full(8, 0.5))
        assert states.shape == next_states.shape == (8, 3)
        if t < 11:
            assert not dones.any()
            np.testing.assert_array_equal(rewards, 0.0)
    assert np.all(dones == 1.0)
    assert envs.episodes_done == 8
    losses, _, _ = hedge_batch(constant(0.5), small_pathset.prices[paths], env_config)
    np.testing.assert_allclose(rewards, reward(losses), rtol=1e-12)
    # all slots restarted at t = 0
    np.testing.assert_array_equal(envs.states()[:, 0], 0.0)


def test_states_are_normalized(small_pathset, env_config):
    envs = ParallelEpisodes(small_pathset, env_config, 3, np.random.default_rng(1))
    states = envs.states()
    np.testing.assert_allclose(states, [[0.0, 1.0, 1.0]] * 3)
    states, _, next_states, _ = envs.step(np.zeros(3))
    np.testing.assert_allclose(next_states[:, 0], 1 / 12)
    # without a position the value stays at the premium
    np.testing.assert_allclose(next_states[:, 2], 1.0)
