"""
Deterministic actor-critic training: DDPG and TD3.

The critic takes the state and the position as input (4 values). TD3 adds
twin critics with a clipped double-Q target, target policy smoothing and
actor updates delayed by `policy_delay` critic updates.
"""

import logging
import numpy as np

from ..numcore.rng import gaussian
from ..numcore.tape import Tape
from .base import Policy, ReplayBuffer
from .rollout import ParallelEpisodes
from .targets import critic_input, ddpg_target, td3_target
from .trainer import Trainer, apply_gradients, check_loss


class DdpgTrainer(Trainer):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.twin = self.config.algorithm == "td3"
        actor = self.network(3, 1, output_head="logistic")
        self._policy = Policy("deterministic", {"actor": actor})
        self.critics = [self.network(4, 1) for _ in range(2 if self.twin else 1)]
        self.target_actor = actor.copy()
        self.target_critics = [c.copy() for c in self.critics]
        self.actor_optim = self.optimizer(self.config.learning_rate)
        self.critic_optims = [
            self.optimizer(self.config.value_learning_rate) for _ in self.critics
        ]
        self.buffer = ReplayBuffer(self.config.replay_capacity, self.generator)
        self.envs = ParallelEpisodes(
            self.train_set, self.env_config, self.config.rollout_envs, self.generator
        )

    @property
    def policy(self) -> Policy:
        return self._policy

    def _target_actor(self, states):
        return self.target_actor(states)[:, 0]

    def collect(self):
        states = self.envs.states()
        mean = self._policy.networks["actor"](states)[:, 0]
        noise = self.config.exploration_noise * gaussian(self.noise_stream, len(mean))
        positions = np.clip(mean + noise, 0.0, 1.0)
        states, rewards, next_states, dones = self.envs.step(positions)
        self.buffer.add(states, positions, rewards, next_states, dones)

    def targets(self, batch) -> np.ndarray:
        if self.twin:
            return td3_target(
                batch["rewards"],
                batch["dones"],
                batch["next_states"],
                self._target_actor,
                self.target_critics[0],
                self.target_critics[1],
                self.config.gamma,
                noise_spec=(self.config.target_noise, self.config.target_noise_clip),
                stream=self.noise_stream,
            )
        return ddpg_target(
            batch["rewards"],
            batch["dones"],
            batch["next_states"],
            self._target_actor,
            self.target_critics[0],
            self.config.gamma,
        )

    def _critic_step(self, critic, optim, inputs, y) -> float:
        tape = Tape()
        q = tape.reshape(critic.forward(inputs, tape), (len(y),))
        loss = tape.mean(tape.square(q - y))
        value = float(loss.value)
        check_loss(value, f"{self.config.algorithm} critic")
        apply_gradients(critic, optim, tape.backward(loss))
        return value

    def _actor_step(self, states) -> float:
        actor = self._policy.networks["actor"]
        tape = Tape()
        positions = actor.forward(states, tape)
        inputs = tape.concat([states, positions], axis=1)
        # critic weights enter as constants, only the actor is updated
        q = self.critics[0].forward(inputs, tape, trainable=False)
        loss = -tape.mean(q)
        value = float(loss.value)
        check_loss(value, f"{self.config.algorithm} actor")
        apply_gradients(actor, self.actor_optim, tape.backward(loss))
        return value

    def _soft_update_targets(self):
        rate = self.config.target_soft_rate
        self.target_actor.soft_update(self._policy.networks["actor"], rate)
        for target, critic in zip(self.target_critics, self.critics):
            target.soft_update(critic, rate)

    def update(self, limit: int = None) -> int:
        warmup = max(self.config.learning_starts, self.config.batch_size)
        self.collect()
        while len(self.buffer) < warmup:
            self.collect()
        batch = self.buffer.sample(self.config.batch_size)
        y = self.targets(batch)
        inputs = critic_input(batch["states"], batch["actions"])
        critic_loss = [
            self._critic_step(critic, optim, inputs, y)
            for critic, optim in zip(self.critics, self.critic_optims)
        ]
        self.updates += 1
        delay = self.config.policy_delay if self.twin else 1
        if self.updates % delay == 0:
            actor_loss = self._actor_step(batch["states"])
            self._soft_update_targets()
            if self.updates % 1000 < delay:
                logging.debug(
                    f"DdpgTrainer.update: {self.updates} updates, critic loss"
                    f" {critic_loss[0]:.5f}, actor loss {actor_loss:.5f}"
                )
        return 1
