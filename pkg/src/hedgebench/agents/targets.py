"""
Bootstrapped targets and surrogate objectives shared by the agents.

Networks are passed as callables that map a batch of states (or
state-action inputs) to outputs, e.g. an ``Mlp`` or a ``Policy`` method.
"""

import numpy as np
from typing import Callable, Tuple

from ..numcore.rng import RngStream, gaussian


def _column(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64).reshape(-1)


def dql_target(
    reward, done, next_state, target_net: Callable, gamma: float = 1.0
) -> np.ndarray:
    """
    ``y = r + (1 - done) gamma max_a Q_target(s', a)``.
    """
    q_next = np.atleast_2d(target_net(np.atleast_2d(next_state)))
    return _column(reward) + (1.0 - _column(done)) * gamma * q_next.max(axis=1)


def double_dql_target(
    reward,
    done,
    next_state,
    online_net: Callable,
    target_net: Callable,
    gamma: float = 1.0,
) -> np.ndarray:
    """
    ``y = r + (1 - done) gamma Q_target(s', argmax_a Q_online(s', a))``.
    """
    next_state = np.atleast_2d(next_state)
    best = np.argmax(np.atleast_2d(online_net(next_state)), axis=1)
    q_next = np.atleast_2d(target_net(next_state))
    q_best = q_next[np.arange(len(best)), best]
    return _column(reward) + (1.0 - _column(done)) * gamma * q_best


def dueling_aggregate(value, advantages) -> np.ndarray:
    """
    ``Q_a = V + A_a - mean(A)``.

    Works for a single state (scalar V, 1D A) and for batches (V of shape
    (N,) or (N, 1), A of shape (N, n_actions)).
    """
    advantages = np.asarray(advantages, dtype=np.float64)
    value = np.asarray(value, dtype=np.float64)
    if advantages.ndim == 2 and value.ndim == 1:
        value = value[:, None]
    return value + advantages - advantages.mean(axis=-1, keepdims=True)


def ppo_clip_objective(ratio, advantage, epsilon: float = 0.2):
    """
    ``min(ratio adv, clip(ratio, 1 - eps, 1 + eps) adv)``, elementwise.
    """
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    out = np.minimum(
        ratio * advantage, np.clip(ratio, 1 - epsilon, 1 + epsilon) * advantage
    )
    return float(out) if out.ndim == 0 else out


def critic_input(states, actions) -> np.ndarray:
    """Concatenates states (N, 3) and actions (N,) to critic inputs (N, 4)."""
    states = np.atleast_2d(states)
    return np.concatenate([states, _column(actions)[:, None]], axis=1)


def ddpg_target(
    reward,
    done,
    next_state,
    target_actor: Callable,
    target_q: Callable,
    gamma: float = 1.0,
) -> np.ndarray:
    """
    ``y = r + (1 - done) gamma Q'(s', mu'(s'))``.
    """
    next_state = np.atleast_2d(next_state)
    a_next = np.clip(_column(target_actor(next_state)), 0.0, 1.0)
    q_next = _column(target_q(critic_input(next_state, a_next)))
    return _column(reward) + (1.0 - _column(done)) * gamma * q_next


def td3_target(
    reward,
    done,
    next_state,
    target_actor: Callable,
    target_q1: Callable,
    target_q2: Callable,
    gamma: float = 1.0,
    noise_spec: Tuple[float, float] = None,
    stream: RngStream = None,
) -> np.ndarray:
    """
    Clipped double-Q target with target policy smoothing::

        a' = clip(mu'(s') + clip(sigma z, -c, c), 0, 1)
        y = r + (1 - done) gamma min(Q1'(s', a'), Q2'(s', a'))

    Parameters
    ----------
    noise_spec : tuple (sigma, c), optional
        Smoothing noise scale and clip. No noise if not given or if no
        `stream` is given.
    stream : RngStream, optional
        Source of the smoothing noise.
    """
    next_state = np.atleast_2d(next_state)
    a_next = _column(target_actor(next_state))
    if noise_spec is not None and stream is not None:
        sigma, clip = noise_spec
        noise = np.clip(sigma * gaussian(stream, len(a_next)), -clip, clip)
        a_next = a_next + noise
    a_next = np.clip(a_next, 0.0, 1.0)
    inputs = critic_input(next_state, a_next)
    q_next = np.minimum(_column(target_q1(inputs)), _column(target_q2(inputs)))
    return _column(reward) + (1.0 - _column(done)) * gamma * q_next
