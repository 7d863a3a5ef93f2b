import numpy as np
from typing import List

from ..exceptions import TrainingDivergenceError
from ..hedging.env import EnvConfig
from ..market.paths import PathSet
from ..numcore.mlp import Mlp
from ..numcore.optim import OptimizerState, optimizer_step
from ..numcore.rng import RngStream
from .base import AgentConfig, Policy

# stream ids derived from the training seed
INIT_STREAM = 0
SAMPLING_STREAM = 1
NOISE_STREAM = 2


class Trainer:
    """
    Base class of the training procedures.

    A trainer owns its networks, optimizers and buffers. Each call to
    `update` performs at least one optimizer step and returns the number of
    steps taken.

    Parameters
    ----------
    env_config : EnvConfig
        Environment configuration.
    train_set : PathSet
        Training paths.
    agent_config : AgentConfig
        Hyperparameters.
    seed : int
        Seed for initialization, sampling and exploration noise.
    budget : int
        Total number of updates planned, used by schedules.
    """

    def __init__(
        self,
        env_config: EnvConfig,
        train_set: PathSet,
        agent_config: AgentConfig,
        seed: int,
        budget: int,
    ):
        self.env_config = env_config
        self.train_set = train_set
        self.config = agent_config
        self.seed = int(seed)
        self.budget = int(budget)
        self.updates = 0
        self.init_stream = RngStream(seed, INIT_STREAM)
        self.generator = RngStream(seed, SAMPLING_STREAM).generator()
        self.noise_stream = RngStream(seed, NOISE_STREAM)

    def network(self, n_in: int, n_out: int, output_head: str = "identity") -> Mlp:
        return Mlp.hidden(
            n_in,
            n_out,
            self.config.hidden_layers,
            self.config.hidden_size,
            activation=self.config.activation,
            output_head=output_head,
            stream=self.init_stream,
        )

    def optimizer(self, learning_rate: float) -> OptimizerState:
        return OptimizerState(kind=self.config.optimizer, learning_rate=learning_rate)

    @property
    def policy(self) -> Policy:
        raise NotImplementedError

    def update(self, limit: int = None) -> int:
        """
        Performs one update (or up to `limit` for trainers with multi-step
        iterations) and returns the number of optimizer steps.
        """
        raise NotImplementedError


def check_loss(value: float, what: str):
    if not np.isfinite(value):
        raise TrainingDivergenceError(f"{what}: non-finite loss {value}")


def apply_gradients(
    net: Mlp, optimizer: OptimizerState, grads: List[np.ndarray]
) -> None:
    net.params = optimizer_step(optimizer, net.params, grads)
