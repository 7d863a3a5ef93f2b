import numpy as np
import pytest

from hedgebench.agents import ALGORITHMS, AgentConfig, train, validation_rsqp
from hedgebench.agents.mcpg import McpgTrainer
from hedgebench.baseline import run_delta_hedge
from hedgebench.exceptions import ConfigurationError, TrainingDivergenceError
from hedgebench.hedging import EnvConfig, hedge_batch, make_state, rsqp
from hedgebench.market import GjrGarchParams, PathSet, simulate_paths


def _tiny_config(algorithm, **kwargs):
    defaults = dict(
        learning_rate=1e-3,
        batch_size=8,
        hidden_layers=1,
        hidden_size=8,
        replay_capacity=256,
        learning_starts=16,
        rollout_envs=4,
        ppo_epochs=5,
    )
    defaults.update(kwargs)
    return AgentConfig(algorithm=algorithm, **defaults)


@pytest.fixture(scope="module")
def flat_pathsets():
    def flat(n):
        zeros = np.zeros((n, 12))
        return PathSet(np.full((n, 13), 100.0), zeros, zeros, GjrGarchParams(), 0)

    return {"train": flat(32), "validation": flat(16)}


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_degenerate_environment(algorithm, flat_pathsets):
    # at-the-money constant prices: every policy ends with R = -p0 < 0
    config = EnvConfig(premium=2.0)
    policy, trace = train(
        algorithm,
        config,
        flat_pathsets,
        _tiny_config(algorithm),
        budget=10,
        validation_every=5,
        seed=1,
    )
    assert trace.updates_done == 10
    assert trace.validation_values == [0.0, 0.0]
    assert trace.best_rsqp == 0.0
    assert validation_rsqp(policy, flat_pathsets["validation"], config) == 0.0


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_smoke_on_simulated_paths(algorithm, small_pathsets, env_config):
    policy, trace = train(
        algorithm,
        env_config,
        small_pathsets,
        _tiny_config(algorithm),
        budget=12,
        validation_every=4,
        seed=2,
    )
    assert trace.updates_done <= 12
    assert [u for u, _ in trace.validation_rsqps][-1] == trace.updates_done
    assert all(np.isfinite(trace.validation_values))
    assert trace.best_rsqp == min(trace.validation_values)
    positions = policy.act(small_pathsets["validation"].prices[:5, :3] / 100)
    assert np.all((positions >= 0) & (positions <= 1))


def test_training_is_reproducible(small_pathsets, env_config):
    runs = [
        train("mcpg", env_config, small_pathsets, _tiny_config("mcpg"), 10, 5, seed=7)
        for _ in range(2)
    ]
    (p1, t1), (p2, t2) = runs
    a = p1.networks["actor"].get_flat()
    assert a.tobytes() == p2.networks["actor"].get_flat().tobytes()
    assert t1.validation_rsqps == t2.validation_rsqps
    other, _ = train(
        "mcpg", env_config, small_pathsets, _tiny_config("mcpg"), 10, 5, seed=8
    )
    assert not np.array_equal(a, other.networks["actor"].get_flat())


def test_validation_schedule(small_pathsets, env_config):
    _, trace = train(
        "mcpg", env_config, small_pathsets, _tiny_config("mcpg"), 20, 5, seed=0
    )
    assert [u for u, _ in trace.validation_rsqps] == [5, 10, 15, 20]
    _, trace = train(
        "mcpg", env_config, small_pathsets, _tiny_config("mcpg"), 12, 5, seed=0
    )
    # a final validation closes a budget that is not a multiple
    assert [u for u, _ in trace.validation_rsqps] == [5, 10, 12]


def test_ppo_iterations_respect_budget(small_pathsets, env_config):
    config = _tiny_config("ppo", ppo_epochs=10)
    _, trace = train("ppo", env_config, small_pathsets, config, 15, 5, seed=0)
    assert trace.updates_done == 15
    assert [u for u, _ in trace.validation_rsqps] == [10, 15]


def test_zero_budget_returns_initial_policy(small_pathsets, env_config):
    policy, trace = train(
        "mcpg", env_config, small_pathsets, _tiny_config("mcpg"), 0, 5, seed=0
    )
    assert trace.updates_done == 0
    assert trace.validation_rsqps == []
    assert policy.kind == "deterministic"


def test_early_stop(small_pathsets, env_config):
    _, trace = train(
        "mcpg",
        env_config,
        small_pathsets,
        _tiny_config("mcpg"),
        budget=50,
        validation_every=5,
        early_stop=lambda values: len(values) >= 2,
    )
    assert trace.early_stopped
    assert trace.stopped_at == 10
    assert trace.updates_done == 10
    assert len(trace.validation_rsqps) == 2


def test_invalid_arguments(small_pathsets, env_config):
    with pytest.raises(ConfigurationError):
        train("sac", env_config, small_pathsets)
    with pytest.raises(ConfigurationError):
        train("ppo", env_config, small_pathsets, _tiny_config("mcpg"))
    with pytest.raises(ConfigurationError):
        train("mcpg", env_config, {"train": small_pathsets["train"]})
    with pytest.raises(ConfigurationError):
        train("mcpg", env_config, small_pathsets, budget=10, validation_every=0)


def test_divergence_carries_trace(small_pathsets, env_config, monkeypatch):
    calls = []

    def diverge(self, limit=None):
        calls.append(limit)
        if len(calls) > 5:
            raise TrainingDivergenceError("mcpg_update: non-finite loss nan")
        return 1

    monkeypatch.setattr(McpgTrainer, "update", diverge)
    with pytest.raises(TrainingDivergenceError) as excinfo:
        train("mcpg", env_config, small_pathsets, _tiny_config("mcpg"), 20, 5)
    trace = excinfo.value.trace
    assert trace.updates_done == 5
    assert len(trace.validation_rsqps) == 1


@pytest.fixture(scope="module")
def benchmark_pathsets():
    params = GjrGarchParams.sp500_monthly()
    return {
        "train": simulate_paths(params, 2**15, 12, seed=99),
        "validation": simulate_paths(params, 2**13, 12, seed=99, stream_offset=2**15),
        "test": simulate_paths(
            params, 2**13, 12, seed=99, stream_offset=2**15 + 2**13
        ),
    }


@pytest.mark.slow
def test_mcpg_beats_delta_hedge(benchmark_pathsets, env_config):
    pathsets = {k: benchmark_pathsets[k] for k in ("train", "validation")}
    test = benchmark_pathsets["test"]
    policy, _ = train(
        "mcpg", env_config, pathsets, budget=20000, validation_every=1000, seed=0
    )
    baseline = rsqp(run_delta_hedge(test, env_config))
    assert validation_rsqp(policy, test, env_config) <= 0.98 * baseline


@pytest.mark.slow
@pytest.mark.parametrize(
    "algorithm", ["dql", "double_dql", "dueling_dql", "dd_dql", "ddpg", "td3", "ppo"]
)
def test_default_networks_stay_finite(algorithm, benchmark_pathsets, env_config):
    pathsets = {k: benchmark_pathsets[k] for k in ("train", "validation")}
    policy, trace = train(
        algorithm,
        env_config,
        pathsets,
        AgentConfig.for_algorithm(algorithm),
        budget=5000,
        validation_every=1000,
        seed=0,
    )
    for name, net in policy.networks.items():
        assert np.all(np.isfinite(net.get_flat())), name
    assert trace.validation_values
    assert all(np.isfinite(trace.validation_values))

    validation = pathsets["validation"]
    _, _, values = hedge_batch(policy, validation.prices, env_config)
    for t in range(12):
        states = make_state(t, validation.prices[:, t], values[:, t], env_config)
        positions = policy.act(states)
        assert np.all((positions >= 0) & (positions <= 1))
    assert np.isfinite(validation_rsqp(policy, validation, env_config))
