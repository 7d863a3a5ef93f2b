from dataclasses import dataclass
import numpy as np
from scipy.special import ndtr

from ..exceptions import ConfigurationError, ContractError


def std_normal_cdf(x):
    """
    Standard normal CDF, evaluated with ``scipy.special.ndtr`` (absolute
    error well below 1e-15 in double precision).
    """
    return ndtr(x)


@dataclass(frozen=True)
class BsInputs:
    """
    Inputs of the Black-Scholes formula.

    Parameters
    ----------
    spot : float
        Current price S.
    strike : float
        Strike K.
    sigma_ann : float
        Annualized volatility.
    tau : float
        Time to expiry in years.
    r_f_ann : float, optional (default: 0)
        Annualized continuously compounded risk-free rate.
    """

    spot: float
    strike: float
    sigma_ann: float
    tau: float
    r_f_ann: float = 0.0

    def __post_init__(self):
        if not (self.spot > 0 and self.strike > 0):
            raise ConfigurationError("BsInputs: spot and strike must be positive")
        if not self.sigma_ann > 0:
            raise ConfigurationError(
                f"BsInputs: sigma_ann must be positive, got {self.sigma_ann}"
            )
        if self.tau < 0:
            raise ConfigurationError(f"BsInputs: tau must be >= 0, got {self.tau}")


def _d1(spot, strike, sigma_ann, tau, r_f_ann):
    return (np.log(spot / strike) + (r_f_ann + 0.5 * sigma_ann**2) * tau) / (
        sigma_ann * np.sqrt(tau)
    )


def bs_call_price(inputs: BsInputs) -> float:
    """
    Black-Scholes price of a European call, intrinsic value at ``tau = 0``.
    """
    S, K, tau = inputs.spot, inputs.strike, inputs.tau
    if tau == 0:
        return float(max(S - K, 0.0))
    d1 = _d1(S, K, inputs.sigma_ann, tau, inputs.r_f_ann)
    d2 = d1 - inputs.sigma_ann * np.sqrt(tau)
    return float(
        S * std_normal_cdf(d1)
        - K * np.exp(-inputs.r_f_ann * tau) * std_normal_cdf(d2)
    )


def delta_hedge_position(
    s_t,
    strike: float,
    sigma_ann: float,
    t: int,
    horizon: int,
    delta_t: float,
    r_f_per_step: float = 0.0,
):
    """
    Black-Scholes delta ``Phi(d1)``, the number of shares held from step `t`
    to ``t + 1``.

    The remaining life is ``(T - t) delta_t`` years. The per-step rate is
    converted to an annual one before entering ``d1``.

    Parameters
    ----------
    s_t : float or np.ndarray
        Current price(s).
    strike : float
        Strike K.
    sigma_ann : float
        Annualized volatility.
    t : int
        Current step, ``t <= T - 1``.
    horizon : int
        Number of steps T.
    delta_t : float
        Years per step.
    r_f_per_step : float, optional (default: 0)
        Risk-free rate per step.

    Returns
    -------
    delta : float or np.ndarray
        Position(s) in (0, 1).
    """
    if t >= horizon:
        raise ContractError(f"delta_hedge_position: no rebalancing at t={t} >= T")
    if not sigma_ann > 0:
        raise ConfigurationError(
            f"delta_hedge_position: sigma_ann must be positive, got {sigma_ann}"
        )
    tau = (horizon - t) * delta_t
    s_t = np.asarray(s_t, dtype=np.float64)
    d1 = _d1(s_t, strike, sigma_ann, tau, r_f_per_step / delta_t)
    out = std_normal_cdf(d1)
    return float(out) if np.ndim(out) == 0 else out
