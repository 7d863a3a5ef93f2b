"""
Simulation, likelihood and maximum-likelihood calibration of the
GJR-GARCH(1,1) model.

The first conditional variance of every path (and of every likelihood
evaluation) is the stationary variance of the model, so simulated paths
start in their long-run regime. For non-stationary parameters, where no such
value exists, ``nu0`` is used instead.
"""

import logging
import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.special import softmax
from tqdm.auto import tqdm
from typing import Sequence, Union
import warnings

from ..exceptions import (
    CalibrationError,
    CalibrationWarning,
    ConfigurationError,
    ContractError,
    NonStationaryWarning,
)
from ..numcore.rng import RngStream, gaussian
from ..utils import n_threads, ordered_map
from .params import GjrGarchParams, stationary_variance
from .paths import PathSet


LOG_2PI = float(np.log(2 * np.pi))

# calibration settings
MAX_EVALUATIONS = 5000
SIMPLEX_TOLERANCE = 1e-8
MIN_CALIBRATION_LENGTH = 50
_WEIGHT_FLOOR = 1e-10


def initial_variance(params: GjrGarchParams, warn: bool = True) -> float:
    """
    Conditional variance of the first step.

    This is the stationary variance if it exists, and ``nu0`` otherwise.
    """
    if params.is_stationary:
        return stationary_variance(params)
    if warn:
        warnings.warn(
            f"Non-stationary GJR-GARCH parameters (persistence"
            f" {params.persistence:.4f}), starting variance recursion at nu0",
            NonStationaryWarning,
        )
    return params.nu0


def simulate_from_innovations(
    params: GjrGarchParams, z: np.ndarray, s0: float = 100.0
):
    """
    Runs the GJR-GARCH recursion for given standard normal innovations.

    Parameters
    ----------
    params : GjrGarchParams
        Model parameters.
    z : np.ndarray
        Innovations, shape (T,) for a single path or (n, T).
    s0 : float, optional (default: 100)
        Initial price.

    Returns
    -------
    prices : np.ndarray
        Shape (n, T + 1) (or (T + 1,) for 1D input).
    log_returns : np.ndarray
        Shape (n, T) (or (T,)).
    cond_variances : np.ndarray
        Shape (n, T) (or (T,)).
    """
    if not s0 > 0:
        raise ConfigurationError(f"s0 must be positive, got {s0}")
    z = np.asarray(z, dtype=np.float64)
    single = z.ndim == 1
    z = np.atleast_2d(z)
    n, T = z.shape
    sig2 = np.empty((n, T))
    y = np.empty((n, T))
    sig2[:, 0] = initial_variance(params)
    for t in range(T):
        if t > 0:
            eps = y[:, t - 1] - params.mu
            leverage = np.where(eps < 0, params.lam, 0.0)
            sig2[:, t] = (
                params.nu0
                + (params.nu + leverage) * eps**2
                + params.xi * sig2[:, t - 1]
            )
        y[:, t] = params.mu + np.sqrt(sig2[:, t]) * z[:, t]
    prices = np.empty((n, T + 1))
    prices[:, 0] = s0
    prices[:, 1:] = s0 * np.exp(np.cumsum(y, axis=1))
    if single:
        return prices[0], y[0], sig2[0]
    return prices, y, sig2


def _innovations(seed: int, stream_ids: Sequence[int], T: int) -> np.ndarray:
    return np.stack([gaussian(RngStream(seed, sid), T) for sid in stream_ids])


def simulate_paths(
    params: GjrGarchParams,
    n: int,
    T: int,
    s0: float = 100.0,
    seed: int = 0,
    delta_t: float = 1 / 12,
    stream_offset: int = 0,
    chunksize: int = 4096,
    threads: int = None,
    progress: bool = False,
) -> PathSet:
    """
    Simulates `n` price paths of `T` steps.

    Path ``i`` draws its innovations from the random stream
    ``(seed, stream_offset + i)``, so any path can be re-generated on its own
    and the result does not depend on the chunk size or the number of
    threads.

    Parameters
    ----------
    params : GjrGarchParams
        Model parameters.
    n : int
        Number of paths.
    T : int
        Number of steps per path.
    s0 : float, optional (default: 100)
        Initial price of all paths.
    seed : int, optional (default: 0)
        Master seed.
    delta_t : float, optional (default: 1/12)
        Years per step, stored with the path set.
    stream_offset : int, optional (default: 0)
        Stream id of the first path.
    chunksize : int, optional (default: 4096)
        Number of paths simulated at once.
    threads : int, optional
        Number of worker threads for drawing innovations, capped by
        ``HEDGEBENCH_THREADS``.
    progress : bool, optional (default: False)
        Whether to show a progress bar.

    Returns
    -------
    pathset : PathSet
    """
    if n < 1 or T < 1:
        raise ConfigurationError(f"Need n >= 1 and T >= 1, got n={n}, T={T}")
    if not s0 > 0:
        raise ConfigurationError(f"s0 must be positive, got {s0}")
    logging.info(
        f"simulate_paths: simulating {n} paths with {T} steps"
        f" (seed={seed}, stream_offset={stream_offset})"
    )
    # warn once here instead of once per chunk
    initial_variance(params, warn=True)
    chunks = [
        range(stream_offset + start, stream_offset + min(start + chunksize, n))
        for start in range(0, n, chunksize)
    ]
    threads = n_threads(threads)
    z = np.concatenate(
        ordered_map(
            lambda ids: _innovations(seed, ids, T),
            tqdm(chunks, disable=not progress, desc="innovations"),
            threads=threads,
        )
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonStationaryWarning)
        prices, y, sig2 = simulate_from_innovations(params, z, s0)
    return PathSet(
        prices,
        y,
        sig2,
        params,
        seed,
        delta_t=delta_t,
        stream_offset=stream_offset,
    )


def conditional_variances(params: GjrGarchParams, returns: np.ndarray) -> np.ndarray:
    """
    Filtered conditional variances of an observed return series.

    Since the residuals ``Y_t - mu`` are observed, the variance recursion is a
    first-order linear filter in ``sigma^2`` and is evaluated with
    ``scipy.signal.lfilter``.
    """
    y = np.asarray(returns, dtype=np.float64)
    eps = y - params.mu
    sig2 = np.empty(len(y))
    sig2[0] = initial_variance(params, warn=False)
    if len(y) > 1:
        shock = eps[:-1] ** 2 * (params.nu + np.where(eps[:-1] < 0, params.lam, 0.0))
        sig2[1:], _ = lfilter(
            [1.0], [1.0, -params.xi], params.nu0 + shock, zi=[params.xi * sig2[0]]
        )
    return sig2


def negative_log_likelihood(params: GjrGarchParams, returns: np.ndarray) -> float:
    """
    Gaussian negative log-likelihood of a return series::

        0.5 * sum_t [log(2 pi) + log(sigma^2_t) + (Y_t - mu)^2 / sigma^2_t]

    Returns ``inf`` if any conditional variance is not positive and finite.
    """
    y = np.asarray(returns, dtype=np.float64)
    if y.ndim != 1 or len(y) == 0:
        raise ContractError("negative_log_likelihood: need a non-empty 1D series")
    sig2 = conditional_variances(params, y)
    if not np.all(np.isfinite(sig2)) or np.any(sig2 <= 0):
        return np.inf
    eps = y - params.mu
    nll = 0.5 * np.sum(LOG_2PI + np.log(sig2) + eps**2 / sig2)
    return float(nll) if np.isfinite(nll) else np.inf


def _from_unconstrained(theta: np.ndarray) -> GjrGarchParams:
    # softmax weights w0..w3 with w0 + w1 + w2 + w3 = 1 and
    # nu = 2 w0, nu + lam = 2 w1, xi = w2, so that the persistence is 1 - w3
    w = softmax(np.append(theta[2:5], 0.0))
    return GjrGarchParams(
        mu=float(theta[0]),
        nu0=float(np.exp(theta[1])),
        nu=float(2 * w[0]),
        lam=float(2 * w[1] - 2 * w[0]),
        xi=float(w[2]),
    )


def _to_unconstrained(params: GjrGarchParams) -> np.ndarray:
    w = np.maximum(
        [
            params.nu / 2,
            (params.nu + params.lam) / 2,
            params.xi,
            1 - params.persistence,
        ],
        _WEIGHT_FLOOR,
    )
    logw = np.log(w)
    return np.array([params.mu, np.log(params.nu0), *(logw[:3] - logw[3])])


def _objective(theta: np.ndarray, returns: np.ndarray) -> float:
    try:
        params = _from_unconstrained(theta)
    except (ConfigurationError, FloatingPointError, OverflowError):
        return np.inf
    return negative_log_likelihood(params, returns)


def _default_starts(returns: np.ndarray) -> list:
    mean = float(np.mean(returns))
    var = float(np.var(returns))
    starts = []
    # low and high persistence starting points
    for nu, lam, xi in [(0.02, 0.02, 0.02), (0.05, 0.1, 0.8)]:
        persistence = nu + xi + lam / 2
        starts.append(
            GjrGarchParams(
                mu=mean, nu0=var * (1 - persistence), nu=nu, lam=lam, xi=xi
            )
        )
    return starts


def calibrate_mle(
    returns: Union[np.ndarray, Sequence[float]],
    init: GjrGarchParams = None,
    max_evaluations: int = MAX_EVALUATIONS,
) -> GjrGarchParams:
    """
    Maximum-likelihood estimate of the GJR-GARCH parameters.

    The likelihood is minimized with Nelder-Mead in an unconstrained space:
    ``mu`` is free, ``nu0`` is log-transformed, and ``(nu, nu + lam, xi)``
    are mapped through a softmax that keeps them non-negative and the
    persistence below one. Each start is polished by a restart from its
    result.

    Parameters
    ----------
    returns : np.ndarray
        Log-return series of length >= 50.
    init : GjrGarchParams, optional
        Starting point. If given, the result never has a larger NLL than
        `init`. Two generic starting points are always tried as well.
    max_evaluations : int, optional (default: 5000)
        Budget of likelihood evaluations per optimizer run.

    Returns
    -------
    params : GjrGarchParams
        Best parameters found. A ``CalibrationWarning`` is issued if the
        optimizer did not converge within its budget.

    Raises
    ------
    ContractError
        If the series is too short.
    CalibrationError
        If the series has zero variance.
    """
    y = np.asarray(returns, dtype=np.float64)
    if y.ndim != 1 or len(y) < MIN_CALIBRATION_LENGTH:
        raise ContractError(
            f"calibrate_mle: need at least {MIN_CALIBRATION_LENGTH} returns"
        )
    if not np.all(np.isfinite(y)):
        raise CalibrationError("calibrate_mle: return series contains NaN/inf")
    if np.var(y) == 0:
        raise CalibrationError("calibrate_mle: return series has zero variance")

    starts = ([init] if init is not None else []) + _default_starts(y)
    options = {
        "maxfev": max_evaluations,
        "xatol": SIMPLEX_TOLERANCE,
        "fatol": SIMPLEX_TOLERANCE,
        "adaptive": True,
    }
    best_theta, best_nll, converged = None, np.inf, False
    for start in starts:
        theta = _to_unconstrained(start)
        success = False
        for _ in range(2):
            res = minimize(
                _objective, theta, args=(y,), method="Nelder-Mead", options=options
            )
            theta, success = res.x, res.success
        nll = _objective(theta, y)
        logging.debug(f"calibrate_mle: start {start} -> nll {nll:.6f}")
        # earlier starts win ties
        if nll < best_nll - 1e-7:
            best_theta, best_nll, converged = theta, nll, success

    if best_theta is None:
        raise CalibrationError("calibrate_mle: no finite likelihood found")
    result = _from_unconstrained(best_theta)
    if init is not None and negative_log_likelihood(init, y) <= best_nll:
        result, best_nll = init, negative_log_likelihood(init, y)
    if not converged:
        warnings.warn(
            "calibrate_mle: optimizer did not converge within"
            f" {max_evaluations} evaluations, returning best found",
            CalibrationWarning,
        )
    logging.info(f"calibrate_mle: {result} with nll {best_nll:.6f}")
    return result
