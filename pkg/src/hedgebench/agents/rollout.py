import numpy as np

from ..hedging.env import EnvConfig, payoff, reward
from ..market.paths import PathSet


class ParallelEpisodes:
    """
    A fixed number of hedging episodes stepped in lockstep.

    Each slot runs an episode on a randomly drawn training path. When an
    episode reaches expiry, its slot is restarted on a new path, so every
    call to `step` yields one transition per slot.

    Parameters
    ----------
    pathset : PathSet
        Training paths.
    config : EnvConfig
        Environment configuration.
    n_envs : int
        Number of slots.
    generator : np.random.Generator
        Draws the path indices.
    """

    def __init__(
        self,
        pathset: PathSet,
        config: EnvConfig,
        n_envs: int,
        generator: np.random.Generator,
    ):
        self.pathset = pathset
        self.config = config
        self.n_envs = int(n_envs)
        self.generator = generator
        self.path_idx = np.zeros(self.n_envs, dtype=int)
        self.t = np.zeros(self.n_envs, dtype=int)
        self.position = np.zeros(self.n_envs)
        self.cash = np.zeros(self.n_envs)
        self.value = np.zeros(self.n_envs)
        self.episodes_done = 0
        self._reset(np.ones(self.n_envs, dtype=bool))

    def _reset(self, mask: np.ndarray):
        n = int(mask.sum())
        self.path_idx[mask] = self.generator.integers(len(self.pathset), size=n)
        self.t[mask] = 0
        self.position[mask] = 0.0
        self.cash[mask] = self.config.premium
        self.value[mask] = self.config.premium

    def _states(self, t, prices, values) -> np.ndarray:
        c = self.config
        return np.stack([t / c.horizon, prices / c.s0, values / c.v0], axis=1)

    def prices(self, offset: int = 0) -> np.ndarray:
        return self.pathset.prices[self.path_idx, self.t + offset]

    def states(self) -> np.ndarray:
        """Current states, shape (n_envs, 3)."""
        return self._states(self.t, self.prices(), self.value)

    def step(self, positions: np.ndarray):
        """
        Rebalances every slot to `positions`.

        Returns
        -------
        states, rewards, next_states, dones : np.ndarray
            The transitions. Rewards are zero except at expiry.
        """
        c = self.config
        states = self.states()
        s_t, s_next = self.prices(), self.prices(1)
        self.cash = (self.cash - s_t * (positions - self.position)) * np.exp(c.r_f)
        self.position = np.asarray(positions, dtype=np.float64).copy()
        self.value = s_next * self.position + self.cash
        self.t = self.t + 1
        next_states = self._states(self.t, s_next, self.value)
        dones = self.t == c.horizon
        rewards = np.zeros(self.n_envs)
        if dones.any():
            losses = -(self.value[dones] - payoff(s_next[dones], c))
            rewards[dones] = reward(losses)
            self.episodes_done += int(dones.sum())
            self._reset(dones)
        return states, rewards, next_states, dones.astype(np.float64)
