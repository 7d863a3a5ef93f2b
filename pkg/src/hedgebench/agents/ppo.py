import logging
import numpy as np

from ..hedging.env import make_state, payoff, reward
from ..numcore.optim import optimizer_step
from ..numcore.rng import gaussian
from ..numcore.tape import Tape
from .base import Policy
from .trainer import Trainer, apply_gradients, check_loss

LOG_STD_BOUNDS = (-20.0, 2.0)
HALF_LOG_2PI = 0.5 * np.log(2 * np.pi)


class PpoTrainer(Trainer):
    """
    Proximal policy optimization with a Gaussian policy.

    Each iteration samples `batch_size` full episodes, computes the advantage
    of every step as terminal return minus critic value (no discounting, the
    reward is terminal only), and takes `ppo_epochs` full-batch steps on the
    clipped surrogate and the critic loss. Every epoch counts as one update.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        actor = self.network(3, 1, output_head="logistic")
        critic = self.network(3, 1)
        self._policy = Policy(
            "gaussian",
            {"actor": actor, "critic": critic},
            log_std=float(np.log(self.config.ppo_init_std)),
        )
        self.actor_optim = self.optimizer(self.config.learning_rate)
        self.critic_optim = self.optimizer(self.config.value_learning_rate)
        self.log_std_optim = self.optimizer(self.config.learning_rate)

    @property
    def policy(self) -> Policy:
        return self._policy

    def collect(self):
        """
        Samples a batch of episodes.

        Returns
        -------
        states : np.ndarray
            Shape (N * T, 3).
        actions : np.ndarray
            Sampled (unclipped) actions, shape (N * T,).
        returns : np.ndarray
            Terminal reward of the episode of each step, shape (N * T,).
        """
        c = self.env_config
        n, T = self.config.batch_size, c.horizon
        idx = self.generator.integers(len(self.train_set), size=n)
        prices = self.train_set.prices[idx]
        std = np.exp(self._policy.log_std)
        actor = self._policy.networks["actor"]
        states = np.empty((T, n, 3))
        actions = np.empty((T, n))
        x = np.zeros(n)
        cash = np.full(n, c.premium)
        value = cash.copy()
        for t in range(T):
            states[t] = make_state(t, prices[:, t], value, c)
            mean = actor(states[t])[:, 0]
            actions[t] = mean + std * gaussian(self.noise_stream, n)
            x_next = np.clip(actions[t], 0.0, 1.0)
            cash = (cash - prices[:, t] * (x_next - x)) * np.exp(c.r_f)
            x = x_next
            value = prices[:, t + 1] * x + cash
        returns = reward(payoff(prices[:, -1], c) - value)
        returns = np.broadcast_to(returns, (T, n))
        return states.reshape(-1, 3), actions.reshape(-1), returns.reshape(-1)

    def _log_prob(self, tape, mean, log_std, actions):
        z = (actions - mean) / tape.exp(log_std)
        return -0.5 * tape.square(z) - log_std - HALF_LOG_2PI

    def update(self, limit: int = None) -> int:
        epochs = self.config.ppo_epochs
        if limit is not None:
            epochs = max(1, min(epochs, limit))
        actor = self._policy.networks["actor"]
        critic = self._policy.networks["critic"]
        states, actions, returns = self.collect()

        mean_old = actor(states)[:, 0]
        log_std_old = self._policy.log_std
        logp_old = (
            -0.5 * ((actions - mean_old) / np.exp(log_std_old)) ** 2
            - log_std_old
            - HALF_LOG_2PI
        )
        advantages = returns - critic(states)[:, 0]
        advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)

        eps = self.config.ppo_clip
        for _ in range(epochs):
            tape = Tape()
            mean = tape.reshape(actor.forward(states, tape), (len(states),))
            log_std = tape.parameter(np.array(self._policy.log_std))
            ratio = tape.exp(self._log_prob(tape, mean, log_std, actions) - logp_old)
            surrogate = tape.minimum(
                ratio * advantages, tape.clip(ratio, 1 - eps, 1 + eps) * advantages
            )
            actor_loss = -tape.mean(surrogate)
            check_loss(float(actor_loss.value), "ppo actor")
            grads = tape.backward(actor_loss)
            apply_gradients(actor, self.actor_optim, grads[:-1])
            self._step_log_std(grads[-1])

            tape = Tape()
            values = tape.reshape(critic.forward(states, tape), (len(states),))
            critic_loss = tape.mean(tape.square(values - returns))
            check_loss(float(critic_loss.value), "ppo critic")
            apply_gradients(critic, self.critic_optim, tape.backward(critic_loss))
            self.updates += 1

        logging.debug(
            f"PpoTrainer.update: {self.updates} updates, actor loss"
            f" {float(actor_loss.value):.5f}, critic loss"
            f" {float(critic_loss.value):.5f}"
        )
        return epochs

    def _step_log_std(self, grad: np.ndarray):
        (new,) = optimizer_step(
            self.log_std_optim, [np.array(self._policy.log_std)], [grad]
        )
        self._policy.log_std = float(np.clip(new, *LOG_STD_BOUNDS))
