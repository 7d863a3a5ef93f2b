from dataclasses import dataclass
from functools import partial
import logging
import numpy as np
from scipy import stats
from typing import List, Sequence

from ..exceptions import ContractError
from ..hedging.env import EnvConfig, rsqp, run_episodes
from ..market.paths import PathSet

EARLY_STOP_WINDOW = 6


def early_stop_check(validation_log: Sequence[float], baseline_rsqp: float) -> bool:
    """
    Early-stopping rule on the validation RSQPs logged so far.

    Training stops once the last five values are all higher than the sixth
    last one, and all six are lower than the RSQP of the delta hedge.
    """
    if len(validation_log) < EARLY_STOP_WINDOW:
        return False
    window = list(validation_log)[-EARLY_STOP_WINDOW:]
    anchor, recent = window[0], window[1:]
    return all(v > anchor for v in recent) and all(v < baseline_rsqp for v in window)


def early_stop_rule(baseline_rsqp: float):
    """``early_stop_check`` with the baseline fixed, as predicate for training."""
    return partial(_early_stop_predicate, baseline_rsqp=baseline_rsqp)


def _early_stop_predicate(validation_log, baseline_rsqp):
    return early_stop_check(validation_log, baseline_rsqp)


@dataclass
class Evaluation:
    """
    RSQP of a policy on several test sets.

    ``std`` is the sample standard deviation (n - 1). For a single test set
    it is reported as 0 with ``std_defined=False``.
    """

    rsqps: List[float]
    mean: float
    std: float
    std_defined: bool = True

    @classmethod
    def from_rsqps(cls, rsqps: Sequence[float]) -> "Evaluation":
        values = np.asarray(rsqps, dtype=np.float64)
        if values.size == 0:
            raise ContractError("Evaluation: need at least one test set")
        if values.size == 1:
            return cls([float(values[0])], float(values[0]), 0.0, False)
        return cls(
            [float(v) for v in values],
            float(np.mean(values)),
            float(np.std(values, ddof=1)),
        )


def evaluate(
    policy,
    tests: Sequence[PathSet],
    env_config: EnvConfig,
    threads: int = None,
) -> Evaluation:
    """
    RSQP of `policy` on every test set, with mean and sample standard
    deviation across sets.
    """
    if len(tests) == 0:
        raise ContractError("evaluate: need at least one test set")
    rsqps = [
        rsqp(run_episodes(policy, test, env_config, threads=threads))
        for test in tests
    ]
    result = Evaluation.from_rsqps(rsqps)
    if not result.std_defined:
        logging.warning("evaluate: single test set, standard deviation set to 0")
    logging.info(
        f"evaluate: mean RSQP {result.mean:.5f} (std {result.std:.5f})"
        f" over {len(tests)} test sets"
    )
    return result


def welch_t_test_one_sided(a: Sequence[float], b: Sequence[float]) -> float:
    """
    One-sided Welch t-test of ``mean(a) < mean(b)``.

    Parameters
    ----------
    a, b : sequence of float
        Samples with at least two values each.

    Returns
    -------
    p_value : float
        In [0, 1]. If both samples have zero variance, the p-value is 0.5 for
        equal means and 0 or 1 otherwise.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ContractError("welch_t_test_one_sided: need two values per sample")
    if np.var(a) == 0 and np.var(b) == 0:
        ma, mb = np.mean(a), np.mean(b)
        if ma == mb:
            return 0.5
        return 0.0 if ma < mb else 1.0
    _, p = stats.ttest_ind(a, b, equal_var=False, alternative="less")
    return float(np.clip(p, 0.0, 1.0))
