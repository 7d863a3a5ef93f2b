"""
Self-financing hedging environment for a short European call.

An episode runs over ``t = 0, ..., T``. The hedger sells the call for the
premium ``p0``, which seeds the cash account, and at every step ``t < T``
chooses the number of shares ``X_{t+1}`` held until the next step::

    c_{t+1} = S_t (X_{t+1} - X_t)                 # cost of the trade
    M_{t+1} = (M_t - c_{t+1}) exp(r_f)            # cash account
    V_{t+1} = S_{t+1} X_{t+1} + M_{t+1}           # portfolio value

At expiry the option is settled and the terminal loss is
``R = -(S_T X_T + M_T - 1{S_T > K} (S_T - K))``. The only non-zero reward is
the terminal reward ``-R^2 1{R > 0}``.

Policies are objects with an ``act(states)`` method or plain callables. They
receive a state of shape (3,) or a batch of shape (N, 3) with columns
``(t/T, S_t/S_0, V_t/V_0)`` and return positions, which are clamped to
[0, 1].
"""

from dataclasses import asdict, dataclass, field
import logging
import numpy as np
import pandas as pd
from pathlib import Path
from typing import Callable, Mapping, Tuple, Union

from ..exceptions import ConfigurationError, ContractError
from ..market.params import GjrGarchParams, annualized_volatility
from ..market.paths import PathSet, PricePath
from ..utils import n_threads, ordered_map, reject_unknown_keys


@dataclass(frozen=True)
class EnvConfig:
    """
    Contract and market setting of the hedging problem.

    Parameters
    ----------
    strike : float, optional (default: 100)
        Strike price K.
    horizon : int, optional (default: 12)
        Number of rebalancing steps T.
    delta_t : float, optional (default: 1/12)
        Years per step.
    r_f : float, optional (default: 0)
        Risk-free rate per step; cash accrues with ``exp(r_f)`` per step.
    s0 : float, optional (default: 100)
        Initial price of the underlying.
    premium : float, optional
        Premium p0 received for the option. If not given, the Black-Scholes
        price at the annualized stationary volatility of the default
        GJR-GARCH parameters is used.
    """

    strike: float = 100.0
    horizon: int = 12
    delta_t: float = 1 / 12
    r_f: float = 0.0
    s0: float = 100.0
    premium: float = None

    def __post_init__(self):
        if not self.strike > 0:
            raise ConfigurationError(f"strike must be positive, got {self.strike}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ConfigurationError(f"horizon must be >= 1, got {self.horizon}")
        if not self.delta_t > 0:
            raise ConfigurationError(f"delta_t must be positive, got {self.delta_t}")
        if not self.s0 > 0:
            raise ConfigurationError(f"s0 must be positive, got {self.s0}")
        object.__setattr__(self, "horizon", int(self.horizon))
        if self.premium is None:
            object.__setattr__(
                self, "premium", self.bs_premium(GjrGarchParams(), self)
            )
        if not self.premium > 0:
            raise ConfigurationError(
                f"premium must be positive (V0 normalization), got {self.premium}"
            )

    @staticmethod
    def bs_premium(params: GjrGarchParams, config: "EnvConfig") -> float:
        """
        Black-Scholes call price at the annualized stationary volatility of
        `params`.
        """
        from ..baseline.pricing import BsInputs, bs_call_price

        sigma = annualized_volatility(params, config.delta_t)
        inputs = BsInputs(
            spot=config.s0,
            strike=config.strike,
            sigma_ann=sigma,
            tau=config.horizon * config.delta_t,
            r_f_ann=config.r_f / config.delta_t,
        )
        return bs_call_price(inputs)

    @classmethod
    def from_market(cls, params: GjrGarchParams, **kwargs) -> "EnvConfig":
        """
        Config whose premium is the Black-Scholes price under `params`
        (unless ``premium`` is given explicitly).
        """
        if kwargs.get("premium") is None:
            kwargs.pop("premium", None)
            unpriced = cls(premium=1.0, **kwargs)
            kwargs["premium"] = cls.bs_premium(params, unpriced)
        return cls(**kwargs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "EnvConfig":
        reject_unknown_keys(data, cls.__dataclass_fields__, "env")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def v0(self) -> float:
        return self.premium


@dataclass(frozen=True)
class HedgeAccount:
    """
    Ledger of a hedging episode at step ``t``.

    ``value`` always equals ``price * position + cash`` for the price at
    which the account was last marked.
    """

    t: int
    position: float
    cash: float
    value: float

    @classmethod
    def open(cls, config: EnvConfig) -> "HedgeAccount":
        return cls(0, 0.0, config.premium, config.premium)


@dataclass
class EpisodeRecord:
    """
    Result of one hedging episode.

    Attributes
    ----------
    prices : np.ndarray
        S_0, ..., S_T.
    positions : np.ndarray
        X_1, ..., X_T.
    cash : np.ndarray
        M_0, ..., M_T.
    values : np.ndarray
        V_0, ..., V_T.
    terminal_loss : float
        R.
    terminal_reward : float
        ``-R^2 1{R > 0}``.
    clamped : bool
        Whether any policy output had to be clamped to [0, 1].
    """

    prices: np.ndarray
    positions: np.ndarray
    cash: np.ndarray
    values: np.ndarray
    terminal_loss: float
    terminal_reward: float
    clamped: bool = field(default=False)


def make_state(t: int, s_t: float, v_t: float, config: EnvConfig) -> np.ndarray:
    """
    Normalized state ``(t/T, S_t/S_0, V_t/V_0)``.

    `s_t` and `v_t` can also be arrays of equal length, in which case a batch
    of states of shape (N, 3) is returned.
    """
    if not 0 <= t <= config.horizon - 1:
        raise ContractError(f"make_state: t={t} outside [0, {config.horizon - 1}]")
    if config.v0 == 0:
        raise ConfigurationError("make_state: V0 must not be zero")
    s_t = np.asarray(s_t, dtype=np.float64)
    v_t = np.asarray(v_t, dtype=np.float64)
    if np.any(s_t <= 0):
        raise ContractError("make_state: prices must be positive")
    tt = np.full(np.broadcast(s_t, v_t).shape, t / config.horizon)
    return np.stack([tt, s_t / config.s0, v_t / config.v0], axis=-1)


def step(
    account: HedgeAccount,
    x_next: float,
    s_t: float,
    s_next: float,
    config: EnvConfig,
) -> HedgeAccount:
    """
    Rebalances to `x_next` shares at price `s_t` and marks the account at
    `s_next` one step later.
    """
    if account.t >= config.horizon:
        raise ContractError(
            f"step: account already at expiry (t={account.t}, T={config.horizon})"
        )
    if not (s_t > 0 and s_next > 0):
        raise ContractError("step: prices must be positive")
    cost = s_t * (x_next - account.position)
    cash = (account.cash - cost) * np.exp(config.r_f)
    value = s_next * x_next + cash
    return HedgeAccount(account.t + 1, float(x_next), float(cash), float(value))


def payoff(s_T, config: EnvConfig):
    """Call payoff with exercise iff ``S_T > K``."""
    s_T = np.asarray(s_T, dtype=np.float64)
    return np.where(s_T > config.strike, s_T - config.strike, 0.0)


def terminal_loss(account: HedgeAccount, s_T: float, config: EnvConfig) -> float:
    """
    Hedging loss ``R = -(S_T X_T + M_T - 1{S_T > K} (S_T - K))``.
    """
    if account.t != config.horizon:
        raise ContractError(
            f"terminal_loss: account at t={account.t}, expected T={config.horizon}"
        )
    profit = s_T * account.position + account.cash - float(payoff(s_T, config))
    return float(-profit)


def rsqp(losses) -> float:
    """
    Root semi-quadratic penalty ``sqrt(mean(R^2 1{R > 0}))``.
    """
    losses = np.asarray(losses, dtype=np.float64).ravel()
    if losses.size == 0:
        raise ContractError("rsqp: need at least one loss")
    shortfall = np.maximum(losses, 0.0)
    return float(np.sqrt(np.mean(shortfall**2)))


def reward(loss):
    """Terminal reward ``-R^2 1{R > 0}``."""
    loss = np.asarray(loss, dtype=np.float64)
    out = -np.where(loss > 0, loss**2, 0.0)
    return float(out) if out.ndim == 0 else out


def query_policy(
    policy: Union[Callable, object], states: np.ndarray
) -> Tuple[np.ndarray, bool]:
    """
    Positions chosen by `policy` for a state or batch of states.

    Returns
    -------
    positions : np.ndarray
        Positions clamped to [0, 1], one per state.
    clamped : bool
        Whether clamping changed any value (or a value was NaN).
    """
    act = policy.act if hasattr(policy, "act") else policy
    states = np.asarray(states, dtype=np.float64)
    n = 1 if states.ndim == 1 else states.shape[0]
    out = np.asarray(act(states), dtype=np.float64).reshape(-1)
    if out.size == 1 and n > 1:
        out = np.full(n, out[0])
    elif out.size != n:
        # callables that only understand single states
        out = np.array([float(np.ravel(act(s))[0]) for s in states])
    clamped_out = np.clip(np.nan_to_num(out, nan=0.0), 0.0, 1.0)
    clamped = bool(np.any(clamped_out != out))
    if clamped:
        logging.warning(
            "query_policy: policy output outside [0, 1] has been clamped"
        )
    return clamped_out, clamped


def _check_horizon(horizon: int, config: EnvConfig):
    if horizon != config.horizon:
        raise ConfigurationError(
            f"Path horizon {horizon} does not match config horizon"
            f" {config.horizon}"
        )


def run_episode(policy, path: PricePath, config: EnvConfig) -> EpisodeRecord:
    """
    Runs one hedging episode of `policy` on `path`.
    """
    _check_horizon(path.horizon, config)
    prices = path.prices
    account = HedgeAccount.open(config)
    positions = np.empty(config.horizon)
    cash = [account.cash]
    values = [account.value]
    any_clamped = False
    for t in range(config.horizon):
        state = make_state(t, prices[t], account.value, config)
        x, clamped = query_policy(policy, state)
        any_clamped |= clamped
        account = step(account, x[0], prices[t], prices[t + 1], config)
        positions[t] = account.position
        cash.append(account.cash)
        values.append(account.value)
    loss = terminal_loss(account, prices[-1], config)
    return EpisodeRecord(
        prices=np.array(prices),
        positions=positions,
        cash=np.array(cash),
        values=np.array(values),
        terminal_loss=loss,
        terminal_reward=reward(loss),
        clamped=any_clamped,
    )


def hedge_batch(policy, prices: np.ndarray, config: EnvConfig):
    """
    Runs episodes for a batch of price paths at once.

    Parameters
    ----------
    policy : callable or object with ``act``
        Must accept a batch of states of shape (N, 3).
    prices : np.ndarray
        Prices of shape (N, T + 1).
    config : EnvConfig

    Returns
    -------
    losses : np.ndarray
        Terminal losses, shape (N,).
    positions : np.ndarray
        Positions X_1..X_T, shape (N, T).
    values : np.ndarray
        Portfolio values V_0..V_T, shape (N, T + 1).
    """
    prices = np.atleast_2d(prices)
    n, T1 = prices.shape
    _check_horizon(T1 - 1, config)
    growth = np.exp(config.r_f)
    x = np.zeros(n)
    cash = np.full(n, config.premium)
    positions = np.empty((n, config.horizon))
    values = np.empty((n, T1))
    values[:, 0] = config.premium
    for t in range(config.horizon):
        states = make_state(t, prices[:, t], values[:, t], config)
        x_next, _ = query_policy(policy, states)
        cash = (cash - prices[:, t] * (x_next - x)) * growth
        x = x_next
        positions[:, t] = x
        values[:, t + 1] = prices[:, t + 1] * x + cash
    losses = -(values[:, -1] - payoff(prices[:, -1], config))
    return losses, positions, values


def run_episodes(
    policy,
    pathset: PathSet,
    config: EnvConfig,
    chunksize: int = 8192,
    threads: int = None,
) -> np.ndarray:
    """
    Terminal losses of `policy` on all paths of `pathset`.

    Chunks of paths are evaluated on a thread pool (size capped by
    ``HEDGEBENCH_THREADS``) and merged in path order.
    """
    _check_horizon(pathset.horizon, config)
    n = len(pathset)
    chunks = [
        pathset.subset(np.arange(s, min(s + chunksize, n)))
        for s in range(0, n, chunksize)
    ]
    results = ordered_map(
        lambda chunk: hedge_batch(policy, chunk.prices, config)[0],
        chunks,
        threads=n_threads(threads),
    )
    return np.concatenate(results)


def episode_trace(policy, path: PricePath, config: EnvConfig) -> pd.DataFrame:
    """
    Step-by-step trace of one episode.

    Columns are t, S_t, X_t, M_t, V_t and the terminal loss R (only set in
    the last row).
    """
    record = run_episode(policy, path, config)
    T = config.horizon
    df = pd.DataFrame(
        {
            "t": np.arange(T + 1),
            "S_t": record.prices,
            "X_t": np.concatenate([[0.0], record.positions]),
            "M_t": record.cash,
            "V_t": record.values,
            "R": np.append(np.full(T, np.nan), record.terminal_loss),
        }
    )
    return df


def write_episode_trace(df: pd.DataFrame, fname: Union[Path, str]):
    fname = Path(fname)
    fname.parent.mkdir(exist_ok=True, parents=True)
    df.to_csv(fname, index=False)
    logging.info(f"write_episode_trace: wrote {fname}")
