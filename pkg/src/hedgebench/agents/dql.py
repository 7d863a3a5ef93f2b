"""
Deep Q-learning on the discrete action grid, in four variants:

- ``dql``: single online network, target ``r + max_a Q_target(s', a)``
- ``double_dql``: action chosen by the online, evaluated by the target network
- ``dueling_dql``: Q split into state value and mean-centred advantages
- ``dd_dql``: dueling network with the double target
"""

import logging
import numpy as np

from ..numcore.tape import Tape, Var
from .base import ActionGrid, Policy, ReplayBuffer
from .rollout import ParallelEpisodes
from .targets import double_dql_target, dql_target
from .trainer import Trainer, apply_gradients, check_loss


def dueling_aggregate_tape(tape: Tape, out: Var) -> Var:
    """
    Dueling aggregation of network outputs ``(V, A_1, ..., A_n)`` on a tape.
    """
    n = out.shape[0]
    value = out[:, 0:1]
    advantages = out[:, 1:]
    mean = tape.reshape(tape.mean(advantages, axis=1), (n, 1))
    return value + advantages - mean


class DqlTrainer(Trainer):
    """
    Epsilon-greedy Q-learning with replay buffer and soft-updated target
    network.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        algorithm = self.config.algorithm
        self.double = algorithm in ("double_dql", "dd_dql")
        self.dueling = algorithm in ("dueling_dql", "dd_dql")
        self.grid = ActionGrid()
        n_out = len(self.grid) + (1 if self.dueling else 0)
        q = self.network(3, n_out)
        self._policy = Policy("greedy", {"q": q}, self.grid, dueling=self.dueling)
        self.target = self._policy.snapshot()
        self.optim = self.optimizer(self.config.learning_rate)
        self.buffer = ReplayBuffer(self.config.replay_capacity, self.generator)
        self.envs = ParallelEpisodes(
            self.train_set, self.env_config, self.config.rollout_envs, self.generator
        )

    @property
    def policy(self) -> Policy:
        return self._policy

    @property
    def epsilon(self) -> float:
        c = self.config
        horizon = c.epsilon_decay_fraction * self.budget
        frac = 1.0 if horizon <= 0 else min(self.updates / horizon, 1.0)
        return c.epsilon_start + frac * (c.epsilon_end - c.epsilon_start)

    def collect(self):
        states = self.envs.states()
        n = len(states)
        greedy = np.argmax(self._policy.q_values(states), axis=1)
        explore = self.generator.random(n) < self.epsilon
        random_idx = self.generator.integers(len(self.grid), size=n)
        idx = np.where(explore, random_idx, greedy)
        positions = self.grid.values[idx]
        states, rewards, next_states, dones = self.envs.step(positions)
        self.buffer.add(states, positions, rewards, next_states, dones, idx)

    def targets(self, batch) -> np.ndarray:
        if self.double:
            return double_dql_target(
                batch["rewards"],
                batch["dones"],
                batch["next_states"],
                self._policy.q_values,
                self.target.q_values,
                self.config.gamma,
            )
        return dql_target(
            batch["rewards"],
            batch["dones"],
            batch["next_states"],
            self.target.q_values,
            self.config.gamma,
        )

    def update(self, limit: int = None) -> int:
        warmup = max(self.config.learning_starts, self.config.batch_size)
        self.collect()
        while len(self.buffer) < warmup:
            self.collect()
        batch = self.buffer.sample(self.config.batch_size)
        y = self.targets(batch)

        q = self._policy.networks["q"]
        tape = Tape()
        out = q.forward(batch["states"], tape)
        if self.dueling:
            out = dueling_aggregate_tape(tape, out)
        q_sa = tape.select(out, batch["action_indices"])
        loss = tape.mean(tape.square(q_sa - y))
        check_loss(float(loss.value), self.config.algorithm)
        apply_gradients(q, self.optim, tape.backward(loss))
        self.target.networks["q"].soft_update(q, self.config.target_soft_rate)
        self.updates += 1
        if self.updates % 1000 == 0:
            logging.debug(
                f"DqlTrainer.update: {self.updates} updates, loss"
                f" {float(loss.value):.6f}, epsilon {self.epsilon:.3f}"
            )
        return 1
