from dataclasses import asdict, dataclass, field, fields
import json
import logging
import numpy as np
from pathlib import Path
from typing import Dict, List, Mapping, Tuple, Union

from ..exceptions import CheckpointError, ConfigurationError
from ..numcore.checkpoint import network_from_dict, network_to_dict
from ..numcore.mlp import Mlp
from ..utils import fingerprint, reject_unknown_keys
from .targets import dueling_aggregate


ALGORITHMS = (
    "mcpg",
    "ppo",
    "td3",
    "dql",
    "ddpg",
    "dueling_dql",
    "dd_dql",
    "double_dql",
)
DQL_FAMILY = ("dql", "double_dql", "dueling_dql", "dd_dql")

# learning rate, batch size, hidden layers, hidden size found by grid search
# on the full-size data sets
BEST_HYPERPARAMETERS = {
    "mcpg": (1e-5, 256, 4, 64),
    "ppo": (1e-5, 128, 2, 256),
    "td3": (1e-5, 64, 4, 256),
    "dql": (1e-4, 64, 4, 128),
    "ddpg": (1e-5, 64, 4, 256),
    "dueling_dql": (1e-4, 128, 3, 256),
    "dd_dql": (1e-4, 256, 3, 256),
    "double_dql": (1e-4, 64, 4, 64),
}


class ActionGrid:
    """
    Discrete positions ``0.00, 0.02, ..., 1.00``.
    """

    def __init__(self, n: int = 51):
        if n < 2:
            raise ConfigurationError(f"ActionGrid needs at least 2 values, got {n}")
        self.values = np.linspace(0.0, 1.0, n)

    def __len__(self):
        return len(self.values)

    def index_of(self, positions) -> np.ndarray:
        """Index of the nearest grid value."""
        positions = np.asarray(positions, dtype=np.float64)
        return np.rint(positions * (len(self) - 1)).astype(int)


class ReplayBuffer:
    """
    Ring buffer of transitions ``(state, action, reward, next_state, done)``.

    Actions are stored as positions together with their grid index (-1 for
    continuous actions).

    Parameters
    ----------
    capacity : int
        Maximum number of transitions.
    generator : np.random.Generator
        Source of the sample indices.
    state_dim : int, optional (default: 3)
    """

    def __init__(
        self, capacity: int, generator: np.random.Generator, state_dim: int = 3
    ):
        if capacity < 1:
            raise ConfigurationError(f"Replay capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self.generator = generator
        self.states = np.empty((self.capacity, state_dim))
        self.actions = np.empty(self.capacity)
        self.action_indices = np.empty(self.capacity, dtype=int)
        self.rewards = np.empty(self.capacity)
        self.next_states = np.empty((self.capacity, state_dim))
        self.dones = np.empty(self.capacity)
        self.cursor = 0
        self.size = 0

    def __len__(self):
        return self.size

    def add(self, states, actions, rewards, next_states, dones, action_indices=None):
        """Adds a batch of transitions, overwriting the oldest if full."""
        states = np.atleast_2d(states)
        n = len(states)
        if action_indices is None:
            action_indices = np.full(n, -1)
        columns = [
            (self.states, states),
            (self.actions, np.reshape(actions, n)),
            (self.action_indices, np.reshape(action_indices, n)),
            (self.rewards, np.reshape(rewards, n)),
            (self.next_states, np.atleast_2d(next_states)),
            (self.dones, np.reshape(dones, n)),
        ]
        idx = (self.cursor + np.arange(n)) % self.capacity
        for target, values in columns:
            target[idx] = values
        self.cursor = int((self.cursor + n) % self.capacity)
        self.size = min(self.size + n, self.capacity)

    def sample(self, batch_size: int) -> Dict[str, np.ndarray]:
        """
        Uniform sample without replacement.
        """
        if batch_size > self.size:
            raise ConfigurationError(
                f"Cannot sample {batch_size} transitions from {self.size}"
            )
        idx = self.generator.choice(self.size, size=batch_size, replace=False)
        return {
            "states": self.states[idx],
            "actions": self.actions[idx],
            "action_indices": self.action_indices[idx],
            "rewards": self.rewards[idx],
            "next_states": self.next_states[idx],
            "dones": self.dones[idx],
        }


@dataclass
class AgentConfig:
    """
    Hyperparameters of a training run.

    Only `algorithm` and the four grid-searched values are required, every
    other field has a default. ``value_learning_rate`` (the critic rate of
    actor-critic methods) defaults to ``learning_rate``.
    """

    algorithm: str
    learning_rate: float
    batch_size: int
    hidden_layers: int
    hidden_size: int
    value_learning_rate: float = None
    optimizer: str = "adam"
    activation: str = "relu"
    gamma: float = 1.0
    target_soft_rate: float = 0.005
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.5
    replay_capacity: int = 100_000
    learning_starts: int = 1000
    rollout_envs: int = 16
    exploration_noise: float = 0.1
    ppo_clip: float = 0.2
    ppo_epochs: int = 10
    ppo_init_std: float = 0.1
    policy_delay: int = 2
    target_noise: float = 0.1
    target_noise_clip: float = 0.25

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(
                f"Unknown algorithm '{self.algorithm}', choose from {ALGORITHMS}"
            )
        if self.value_learning_rate is None:
            self.value_learning_rate = self.learning_rate
        for name in ("learning_rate", "value_learning_rate"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative")
        for name in ("batch_size", "hidden_layers", "hidden_size", "rollout_envs"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if not self.ppo_clip > 0:
            raise ConfigurationError("ppo_clip must be positive")
        if self.policy_delay < 1 or self.ppo_epochs < 1:
            raise ConfigurationError("policy_delay and ppo_epochs must be >= 1")

    @classmethod
    def for_algorithm(cls, algorithm: str, **overrides) -> "AgentConfig":
        """
        Config with the best known hyperparameters of `algorithm`.
        """
        if algorithm not in BEST_HYPERPARAMETERS:
            raise ConfigurationError(f"Unknown algorithm '{algorithm}'")
        lr, batch, layers, size = BEST_HYPERPARAMETERS[algorithm]
        kwargs = dict(
            algorithm=algorithm,
            learning_rate=lr,
            batch_size=batch,
            hidden_layers=layers,
            hidden_size=size,
        )
        kwargs.update(overrides)
        return cls(**kwargs)

    @staticmethod
    def hyperparameters(algorithm: str) -> List[str]:
        """
        Names of all hyperparameters that influence `algorithm`.
        """
        common = [
            "learning_rate",
            "batch_size",
            "hidden_layers",
            "hidden_size",
            "activation",
            "optimizer",
        ]
        replay = ["replay_capacity", "learning_starts", "rollout_envs"]
        if algorithm in DQL_FAMILY:
            return common + [
                "gamma",
                "target_soft_rate",
                "epsilon_start",
                "epsilon_end",
                "epsilon_decay_fraction",
            ] + replay
        if algorithm == "mcpg":
            return common
        if algorithm == "ppo":
            return common + [
                "value_learning_rate",
                "gamma",
                "ppo_clip",
                "ppo_epochs",
                "ppo_init_std",
            ]
        if algorithm in ("ddpg", "td3"):
            names = common + [
                "value_learning_rate",
                "gamma",
                "target_soft_rate",
                "exploration_noise",
            ] + replay
            if algorithm == "td3":
                names += ["policy_delay", "target_noise", "target_noise_clip"]
            return names
        raise ConfigurationError(f"Unknown algorithm '{algorithm}'")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "AgentConfig":
        reject_unknown_keys(data, [f.name for f in fields(cls)], "agent_config")
        return cls(**data)


POLICY_KINDS = ("greedy", "deterministic", "gaussian")


class Policy:
    """
    Trained decision rule mapping normalized states to positions in [0, 1].

    Parameters
    ----------
    kind : str
        "greedy" (argmax over Q-values on an action grid), "deterministic"
        (actor network with logistic head) or "gaussian" (mean network with
        logistic head and a learned log standard deviation; `act` returns
        the mean).
    networks : dict of Mlp
        "q" for greedy policies, "actor" otherwise.
    action_grid : ActionGrid, optional
        Required for greedy policies.
    dueling : bool, optional (default: False)
        Whether the Q network outputs ``(V, A_1, ..., A_n)``.
    log_std : float, optional
        Log standard deviation of gaussian policies.
    """

    def __init__(
        self,
        kind: str,
        networks: Dict[str, Mlp],
        action_grid: ActionGrid = None,
        dueling: bool = False,
        log_std: float = None,
    ):
        if kind not in POLICY_KINDS:
            raise ConfigurationError(f"Unknown policy kind '{kind}'")
        if kind == "greedy" and action_grid is None:
            raise ConfigurationError("Greedy policies need an action grid")
        self.kind = kind
        self.networks = dict(networks)
        self.action_grid = action_grid
        self.dueling = dueling
        self.log_std = log_std

    def q_values(self, states) -> np.ndarray:
        out = self.networks["q"](np.atleast_2d(states))
        if self.dueling:
            return dueling_aggregate(out[:, 0], out[:, 1:])
        return out

    def act(self, states) -> np.ndarray:
        states = np.asarray(states, dtype=np.float64)
        batch = np.atleast_2d(states)
        if self.kind == "greedy":
            out = self.action_grid.values[np.argmax(self.q_values(batch), axis=1)]
        else:
            out = np.clip(self.networks["actor"](batch)[:, 0], 0.0, 1.0)
        return out[0] if states.ndim == 1 else out

    __call__ = act

    def snapshot(self) -> "Policy":
        return Policy(
            self.kind,
            {k: v.copy() for k, v in self.networks.items()},
            self.action_grid,
            self.dueling,
            self.log_std,
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "networks": {k: network_to_dict(v) for k, v in self.networks.items()},
            "action_grid": None if self.action_grid is None else len(self.action_grid),
            "dueling": self.dueling,
            "log_std": self.log_std,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Policy":
        try:
            networks = {k: network_from_dict(v)[0] for k, v in doc["networks"].items()}
            grid = doc.get("action_grid")
            return cls(
                doc["kind"],
                networks,
                action_grid=None if grid is None else ActionGrid(grid),
                dueling=doc.get("dueling", False),
                log_std=doc.get("log_std"),
            )
        except KeyError as e:
            raise CheckpointError(f"Policy checkpoint misses field {e}")


@dataclass
class TrainingTrace:
    """
    Record of a training run.

    Attributes
    ----------
    updates_done : int
        Number of optimizer steps taken.
    validation_rsqps : list of (int, float)
        Validation RSQP after the given number of updates.
    validation_times : list of float
        Wall-clock seconds since the start of training at each validation.
    wall_clock : float
        Total training time in seconds.
    early_stopped : bool
        Whether training was stopped by the early-stopping rule.
    stopped_at : int, optional
        Update count at which early stopping fired.
    best_rsqp : float
        Lowest validation RSQP.
    best_checkpoint : Policy, optional
        Policy snapshot with the lowest validation RSQP.
    """

    updates_done: int = 0
    validation_rsqps: List[Tuple[int, float]] = field(default_factory=list)
    validation_times: List[float] = field(default_factory=list)
    wall_clock: float = 0.0
    early_stopped: bool = False
    stopped_at: int = None
    best_rsqp: float = float("inf")
    best_checkpoint: Policy = None

    @property
    def validation_values(self) -> List[float]:
        return [v for _, v in self.validation_rsqps]

    def record(self, updates: int, value: float, elapsed: float, policy: Policy):
        self.validation_rsqps.append((int(updates), float(value)))
        self.validation_times.append(float(elapsed))
        if value < self.best_rsqp:
            self.best_rsqp = float(value)
            self.best_checkpoint = policy.snapshot()

    def to_dict(self) -> dict:
        return {
            "updates_done": self.updates_done,
            "validation_rsqps": [list(x) for x in self.validation_rsqps],
            "early_stopped": self.early_stopped,
            "stopped_at": self.stopped_at,
            "best_rsqp": self.best_rsqp if np.isfinite(self.best_rsqp) else None,
        }


def save_agent(
    fname: Union[Path, str],
    policy: Policy,
    agent_config: AgentConfig,
    env_config,
    seed: int,
    update_count: int,
):
    """
    Writes a policy with its metadata envelope as JSON.
    """
    fname = Path(fname)
    fname.parent.mkdir(exist_ok=True, parents=True)
    doc = {
        "algorithm": agent_config.algorithm,
        "agent_config": agent_config.to_dict(),
        "env_fingerprint": fingerprint(env_config),
        "seed": int(seed),
        "update_count": int(update_count),
        "policy": policy.to_dict(),
    }
    with open(fname, "w") as f:
        json.dump(doc, f)
    logging.info(f"save_agent: wrote {agent_config.algorithm} policy to {fname}")


def load_agent(fname: Union[Path, str]) -> Tuple[Policy, dict]:
    """
    Reads a policy checkpoint.

    Returns
    -------
    policy : Policy
    meta : dict
        The envelope without the policy; ``meta["agent_config"]`` is an
        ``AgentConfig``.
    """
    fname = Path(fname)
    if not fname.exists():
        raise CheckpointError(f"Agent checkpoint not found: {fname}")
    with open(fname, "r") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise CheckpointError(f"Corrupt agent checkpoint {fname}: {e}")
    if "policy" not in doc:
        raise CheckpointError(f"{fname} holds no policy")
    policy = Policy.from_dict(doc.pop("policy"))
    if "agent_config" in doc:
        doc["agent_config"] = AgentConfig.from_dict(doc["agent_config"])
    return policy, doc
