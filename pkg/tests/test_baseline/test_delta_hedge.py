import numpy as np
import pytest

from hedgebench.baseline import DeltaHedgePolicy, delta_hedge_position, run_delta_hedge
from hedgebench.exceptions import ContractError
from hedgebench.hedging import EnvConfig, rsqp, run_episode
from hedgebench.market import (
    GjrGarchParams,
    PathSet,
    PricePath,
    annualized_volatility,
    simulate_paths,
)


def test_positions_match_step_by_step_delta(small_pathset, env_config):
    sigma = annualized_volatility(small_pathset.params)
    policy = DeltaHedgePolicy(env_config, sigma)
    path = small_pathset[5]
    record = run_episode(policy, path, env_config)
    expected = [
        delta_hedge_position(path.prices[t], 100.0, sigma, t, 12, 1 / 12)
        for t in range(12)
    ]
    np.testing.assert_allclose(record.positions, expected, rtol=1e-12)


def test_constant_at_the_money_path(env_config):
    sigma = 0.1337
    record = run_episode(
        DeltaHedgePolicy(env_config, sigma), PricePath.constant(100, 12), env_config
    )
    # d1 = sigma sqrt(tau) / 2 shrinks with the remaining life
    assert np.all(np.diff(record.positions) < 0)
    assert np.all(record.positions > 0.5)
    assert record.positions[0] == pytest.approx(
        delta_hedge_position(100.0, 100.0, sigma, 0, 12, 1 / 12)
    )
    assert record.terminal_loss == pytest.approx(-env_config.premium)


def test_zero_volatility_pathset(env_config):
    prices = np.full((8, 13), 100.0)
    flat = PathSet(prices, np.zeros((8, 12)), np.zeros((8, 12)), GjrGarchParams(), 0)
    losses = run_delta_hedge(flat, env_config)
    np.testing.assert_allclose(losses, -env_config.premium, atol=1e-10)


def test_batched_policy(env_config):
    policy = DeltaHedgePolicy(env_config, 0.2)
    states = np.array([[0.5, 0.9, 1.0], [0.5, 1.1, 1.0]])
    x = policy.act(states)
    assert x.shape == (2,)
    assert x[0] < x[1]
    assert policy.name == "bsdh"


def test_states_from_different_steps_are_rejected(env_config):
    policy = DeltaHedgePolicy(env_config, 0.2)
    states = np.array([[0.0, 1.0, 1.0], [6 / 12, 1.0, 1.0]])
    with pytest.raises(ContractError):
        policy.act(states)


def test_baseline_losses(small_pathset, env_config):
    losses = run_delta_hedge(small_pathset, env_config)
    assert losses.shape == (512,)
    value = rsqp(losses)
    assert np.isfinite(value) and value > 0
    # volatility override
    assert not np.array_equal(losses, run_delta_hedge(small_pathset, env_config, 0.3))


@pytest.mark.slow
def test_baseline_magnitude(garch_params, env_config):
    pathset = simulate_paths(garch_params, 2**15, 12, seed=2024)
    value = rsqp(run_delta_hedge(pathset, env_config))
    assert value == pytest.approx(0.90, abs=0.05)
