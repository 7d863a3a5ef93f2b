import numpy as np
import pytest

from hedgebench.agents import (
    ALGORITHMS,
    BEST_HYPERPARAMETERS,
    ActionGrid,
    AgentConfig,
    Policy,
    ReplayBuffer,
    TrainingTrace,
    load_agent,
    save_agent,
)
from hedgebench.exceptions import CheckpointError, ConfigurationError
from hedgebench.numcore import Mlp, RngStream


def test_action_grid():
    grid = ActionGrid()
    assert len(grid) == 51
    assert grid.values[1] == pytest.approx(0.02)
    assert grid.values[-1] == 1.0
    np.testing.assert_array_equal(grid.index_of([0.0, 0.5, 0.021, 1.0]), [0, 25, 1, 50])
    with pytest.raises(ConfigurationError):
        ActionGrid(1)


def test_replay_buffer_ring():
    buffer = ReplayBuffer(5, np.random.default_rng(0))
    for k in range(3):
        states = np.full((3, 3), float(k))
        buffer.add(states, [0.1] * 3, [0.0] * 3, states + 1, [0.0] * 3)
    assert len(buffer) == 5
    assert buffer.cursor == 4
    # the oldest transitions were overwritten
    assert set(buffer.states[:, 0]) == {1.0, 2.0}
    assert np.all(buffer.action_indices == -1)


def test_replay_buffer_sample():
    buffer = ReplayBuffer(100, np.random.default_rng(1))
    states = np.arange(60.0).reshape(20, 3)
    buffer.add(states, np.linspace(0, 1, 20), np.zeros(20), states, np.zeros(20))
    sample = buffer.sample(20)
    assert len(np.unique(sample["states"][:, 0])) == 20
    assert sample["next_states"].shape == (20, 3)
    with pytest.raises(ConfigurationError):
        buffer.sample(21)
    with pytest.raises(ConfigurationError):
        ReplayBuffer(0, np.random.default_rng(1))


def test_agent_config_defaults():
    assert set(BEST_HYPERPARAMETERS) == set(ALGORITHMS)
    config = AgentConfig.for_algorithm("mcpg")
    assert config.learning_rate == 1e-5
    assert config.batch_size == 256
    assert (config.hidden_layers, config.hidden_size) == (4, 64)
    assert config.value_learning_rate == config.learning_rate

    config = AgentConfig.for_algorithm("td3", batch_size=32)
    assert config.batch_size == 32
    assert AgentConfig.from_dict(config.to_dict()) == config


def test_agent_config_validation():
    with pytest.raises(ConfigurationError):
        AgentConfig.for_algorithm("sac")
    with pytest.raises(ConfigurationError):
        AgentConfig("dql", 1e-3, 0, 2, 8)
    with pytest.raises(ConfigurationError):
        AgentConfig("ppo", -1e-3, 8, 2, 8)
    with pytest.raises(ConfigurationError):
        AgentConfig.from_dict({**AgentConfig.for_algorithm("dql").to_dict(), "tau": 1})


def test_hyperparameter_names():
    assert AgentConfig.hyperparameters("mcpg")[:4] == [
        "learning_rate",
        "batch_size",
        "hidden_layers",
        "hidden_size",
    ]
    assert "epsilon_end" in AgentConfig.hyperparameters("dd_dql")
    assert "policy_delay" in AgentConfig.hyperparameters("td3")
    assert "policy_delay" not in AgentConfig.hyperparameters("ddpg")
    assert "ppo_clip" in AgentConfig.hyperparameters("ppo")


def _greedy_policy(best_index, dueling=False):
    q = Mlp([3, 52 if dueling else 51])
    bias = np.zeros(52 if dueling else 51)
    bias[best_index + (1 if dueling else 0)] = 1.0
    q.params = [q.weights[0], bias]
    return Policy("greedy", {"q": q}, ActionGrid(), dueling=dueling)


def test_greedy_policy():
    policy = _greedy_policy(10)
    assert policy.act(np.array([0.0, 1.0, 1.0])) == pytest.approx(0.2)
    np.testing.assert_allclose(policy.act(np.ones((4, 3))), 0.2)
    assert _greedy_policy(40, dueling=True).act(np.ones(3)) == pytest.approx(0.8)


def test_deterministic_policy():
    policy = Policy("deterministic", {"actor": Mlp([3, 1], output_head="logistic")})
    assert policy(np.ones(3)) == 0.5
    with pytest.raises(ConfigurationError):
        Policy("greedy", {"q": Mlp([3, 51])})
    with pytest.raises(ConfigurationError):
        Policy("stochastic", {})


def test_snapshot_is_independent():
    actor = Mlp([3, 4, 1], output_head="logistic", stream=RngStream(0, 0))
    policy = Policy("deterministic", {"actor": actor})
    snapshot = policy.snapshot()
    actor.set_flat(np.zeros(actor.n_params))
    assert snapshot(np.ones(3)) != policy(np.ones(3))


def test_training_trace():
    policy = Policy("deterministic", {"actor": Mlp([3, 1], output_head="logistic")})
    trace = TrainingTrace()
    for updates, value in [(5, 0.9), (10, 0.7), (15, 0.8)]:
        trace.record(updates, value, 0.1 * updates, policy)
    assert trace.best_rsqp == 0.7
    assert trace.validation_values == [0.9, 0.7, 0.8]
    doc = trace.to_dict()
    assert doc["validation_rsqps"] == [[5, 0.9], [10, 0.7], [15, 0.8]]
    assert "validation_times" not in doc
    assert "wall_clock" not in doc
    assert TrainingTrace().to_dict()["best_rsqp"] is None


def test_agent_checkpoint(env_config, test_output_path):
    actor = Mlp.hidden(3, 1, 2, 8, output_head="logistic", stream=RngStream(4, 0))
    critic = Mlp.hidden(3, 1, 2, 8, stream=RngStream(4, 1))
    policy = Policy("gaussian", {"actor": actor, "critic": critic}, log_std=-2.3)
    config = AgentConfig.for_algorithm("ppo")
    fname = test_output_path / "agents" / "ppo.json"
    save_agent(fname, policy, config, env_config, seed=3, update_count=500)

    loaded, meta = load_agent(fname)
    states = np.random.default_rng(0).uniform(size=(10, 3))
    assert loaded.act(states).tobytes() == policy.act(states).tobytes()
    assert loaded.log_std == -2.3
    assert meta["algorithm"] == "ppo"
    assert meta["agent_config"] == config
    assert meta["seed"] == 3
    assert meta["update_count"] == 500


def test_agent_checkpoint_errors(test_output_path):
    with pytest.raises(CheckpointError):
        load_agent(test_output_path / "none.json")
    fname = test_output_path / "empty.json"
    fname.write_text("{}")
    with pytest.raises(CheckpointError):
        load_agent(fname)
