"""
Monte Carlo policy gradient with a pathwise gradient.

Whole episodes are recorded on the tape: positions, cash recursion and
terminal losses are differentiable functions of the policy weights, so the
gradient of the empirical RSQP of a batch flows back through all time steps.
"""

import logging
import numpy as np

from ..hedging.env import EnvConfig, payoff
from ..numcore.optim import OptimizerState
from ..numcore.tape import Tape
from .base import Policy
from .trainer import Trainer, apply_gradients, check_loss


def rsqp_on_tape(policy: Policy, prices: np.ndarray, config: EnvConfig):
    """
    Records a batch of episodes and their empirical RSQP on a new tape.

    Returns
    -------
    tape : Tape
    rho : Var
        Scalar RSQP of the batch.
    """
    actor = policy.networks["actor"]
    prices = np.atleast_2d(prices)
    n = len(prices)
    growth = np.exp(config.r_f)
    tape = Tape()
    x_prev = tape.constant(np.zeros(n))
    cash = tape.constant(np.full(n, config.premium))
    value = cash
    for t in range(config.horizon):
        state = tape.concat(
            [
                np.full((n, 1), t / config.horizon),
                prices[:, t : t + 1] / config.s0,
                tape.reshape(value * (1.0 / config.v0), (n, 1)),
            ],
            axis=1,
        )
        x = tape.reshape(actor.forward(state, tape), (n,))
        cash = (cash - prices[:, t] * (x - x_prev)) * growth
        value = prices[:, t + 1] * x + cash
        x_prev = x
    losses = payoff(prices[:, -1], config) - value
    shortfall = tape.maximum(losses, 0.0)
    rho = tape.sqrt(tape.mean(tape.square(shortfall)))
    return tape, rho


def mcpg_update(
    policy: Policy,
    prices: np.ndarray,
    config: EnvConfig,
    optimizer: OptimizerState,
) -> float:
    """
    One gradient step on the empirical RSQP of a batch of paths.

    Parameters
    ----------
    policy : Policy
        Deterministic policy with logistic actor, updated in place.
    prices : np.ndarray
        Batch of price paths, shape (N, T + 1).
    config : EnvConfig
    optimizer : OptimizerState

    Returns
    -------
    rho : float
        RSQP of the batch before the step. If it is zero (no path with a
        positive loss), the gradient vanishes and no step is taken.
    """
    tape, rho = rsqp_on_tape(policy, prices, config)
    value = float(rho.value)
    check_loss(value, "mcpg_update")
    if value == 0.0:
        logging.warning("mcpg_update: no positive loss in batch, skipping step")
        return value
    apply_gradients(policy.networks["actor"], optimizer, tape.backward(rho))
    return value


class McpgTrainer(Trainer):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        actor = self.network(3, 1, output_head="logistic")
        self._policy = Policy("deterministic", {"actor": actor})
        self.optim = self.optimizer(self.config.learning_rate)

    @property
    def policy(self) -> Policy:
        return self._policy

    def update(self, limit: int = None) -> int:
        idx = self.generator.integers(len(self.train_set), size=self.config.batch_size)
        rho = mcpg_update(
            self._policy, self.train_set.prices[idx], self.env_config, self.optim
        )
        self.updates += 1
        if self.updates % 1000 == 0:
            logging.debug(f"McpgTrainer.update: {self.updates} updates, rsqp {rho:.5f}")
        return 1
