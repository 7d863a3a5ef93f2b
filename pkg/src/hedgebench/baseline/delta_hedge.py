import logging
import numpy as np

from ..exceptions import ContractError
from ..hedging.env import EnvConfig, run_episodes
from ..market.params import annualized_volatility
from ..market.paths import PathSet
from .pricing import delta_hedge_position


class DeltaHedgePolicy:
    """
    Black-Scholes delta hedge as a policy on normalized states.

    The step and the price are recovered from the state as
    ``t = round(T * state[0])`` and ``S_t = S_0 * state[1]``.

    Parameters
    ----------
    config : EnvConfig
        Environment the policy acts in.
    sigma_ann : float
        Annualized volatility used in the delta.
    """

    name = "bsdh"

    def __init__(self, config: EnvConfig, sigma_ann: float):
        self.config = config
        self.sigma_ann = float(sigma_ann)

    def act(self, states):
        """
        Delta positions for a batch of states that all share the same step.
        """
        states = np.asarray(states, dtype=np.float64)
        steps = np.unique(np.rint(np.ravel(states[..., 0]) * self.config.horizon))
        if steps.size != 1:
            raise ContractError(
                f"DeltaHedgePolicy.act: states mix steps {steps.astype(int).tolist()}"
            )
        t = int(steps[0])
        s_t = states[..., 1] * self.config.s0
        return delta_hedge_position(
            s_t,
            self.config.strike,
            self.sigma_ann,
            t,
            self.config.horizon,
            self.config.delta_t,
            self.config.r_f,
        )

    __call__ = act


def run_delta_hedge(
    pathset: PathSet,
    config: EnvConfig,
    sigma_ann: float = None,
    threads: int = None,
) -> np.ndarray:
    """
    Terminal losses of the delta hedge on every path of `pathset`.

    Parameters
    ----------
    pathset : PathSet
        Paths to hedge.
    config : EnvConfig
        Environment configuration.
    sigma_ann : float, optional
        Volatility for the delta. Defaults to the annualized stationary
        volatility of the path set's parameters.
    threads : int, optional
        Worker threads for the evaluation.

    Returns
    -------
    losses : np.ndarray
    """
    if sigma_ann is None:
        sigma_ann = annualized_volatility(pathset.params, pathset.delta_t)
    logging.info(
        f"run_delta_hedge: hedging {len(pathset)} paths with sigma={sigma_ann:.5f}"
    )
    policy = DeltaHedgePolicy(config, sigma_ann)
    return run_episodes(policy, pathset, config, threads=threads)
