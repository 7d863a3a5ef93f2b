from dataclasses import asdict, dataclass
import numpy as np
from typing import Mapping

from ..exceptions import ConfigurationError, NonStationaryError
from ..utils import reject_unknown_keys


@dataclass(frozen=True)
class GjrGarchParams:
    """
    Parameters of the GJR-GARCH(1,1) model for per-step log-returns::

        Y_t = mu + sigma_t z_t
        sigma^2_t = nu0 + (nu + lam I_{t-1}) eps^2_{t-1} + xi sigma^2_{t-1}

    with ``eps_t = Y_t - mu`` and ``I_t = 1`` iff ``Y_t < mu``.

    Parameters
    ----------
    mu : float
        Mean log-return per step.
    nu0 : float
        Variance intercept, must be positive.
    nu : float
        ARCH coefficient, must be non-negative.
    lam : float
        Leverage coefficient, ``nu + lam`` must be non-negative.
    xi : float
        GARCH coefficient, must be non-negative.
    """

    mu: float = 0.00533410
    nu0: float = 0.00018216
    nu: float = 0.00026564
    lam: float = 0.34275732
    xi: float = 0.70611408

    def __post_init__(self):
        values = [self.mu, self.nu0, self.nu, self.lam, self.xi]
        if not all(np.isfinite(values)):
            raise ConfigurationError(f"GJR-GARCH parameters must be finite: {self}")
        if not self.nu0 > 0:
            raise ConfigurationError(f"nu0 must be positive, got {self.nu0}")
        if self.nu < 0:
            raise ConfigurationError(f"nu must be non-negative, got {self.nu}")
        if self.xi < 0:
            raise ConfigurationError(f"xi must be non-negative, got {self.xi}")
        if self.nu + self.lam < 0:
            raise ConfigurationError(
                f"nu + lam must be non-negative, got {self.nu + self.lam}"
            )

    @classmethod
    def sp500_monthly(cls) -> "GjrGarchParams":
        """Monthly S&P 500 calibration used as default throughout."""
        return cls()

    @property
    def persistence(self) -> float:
        return self.nu + self.xi + 0.5 * self.lam

    @property
    def is_stationary(self) -> bool:
        return self.persistence < 1

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "GjrGarchParams":
        # "lambda" is accepted as alias since it is the name used in the
        # literature, but cannot be a python identifier
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        reject_unknown_keys(data, ["mu", "nu0", "nu", "lam", "xi"], "garch_params")
        return cls(**{k: float(v) for k, v in data.items()})


def stationary_variance(params: GjrGarchParams) -> float:
    """
    Unconditional per-step variance ``nu0 / (1 - nu - xi - lam/2)``.

    Raises
    ------
    NonStationaryError
        If the persistence ``nu + xi + lam/2`` is 1 or larger.
    """
    if not params.is_stationary:
        raise NonStationaryError(
            f"Persistence {params.persistence:.6f} >= 1, no stationary variance"
        )
    return params.nu0 / (1.0 - params.persistence)


def annualized_volatility(params: GjrGarchParams, delta_t: float = 1 / 12) -> float:
    """
    ``sqrt(stationary_variance / delta_t)``.
    """
    return float(np.sqrt(stationary_variance(params) / delta_t))
