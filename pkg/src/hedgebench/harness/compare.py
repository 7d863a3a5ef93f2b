"""
Comparison of trained hedging policies on the test sets.

The report lists one row per algorithm, sorted by mean test RSQP. Each row
carries the p-value of the one-sided Welch test that its mean RSQP is lower
than that of the row directly below it.
"""

from dataclasses import dataclass, field
import json
import logging
import pandas as pd
from pathlib import Path
from typing import List, Mapping, Union
import warnings

from ..agents.base import AgentConfig, TrainingTrace, load_agent
from ..agents.train import train, validation_rsqp
from ..baseline.delta_hedge import DeltaHedgePolicy
from ..exceptions import CheckpointError, TrainingDivergenceError
from ..market.params import annualized_volatility
from ..utils import fingerprint, n_threads, ordered_map
from .datasets import Datasets, generate_datasets
from .evaluation import Evaluation, early_stop_rule, evaluate, welch_t_test_one_sided
from .spec import BASELINE, ExperimentSpec

REPORT_COLUMNS = [
    "algorithm",
    "mean_rsqp",
    "std_rsqp",
    "p_value_vs_next",
    "runtime_s",
    "error",
]


@dataclass
class TrialResult:
    """
    Test-set performance of one algorithm.

    ``mean`` and ``std`` are derived from ``rsqps``. Rows that failed (a
    missing checkpoint or a diverged training) have an ``error`` message and
    no RSQPs.
    """

    algorithm: str
    rsqps: List[float] = field(default_factory=list)
    mean: float = float("nan")
    std: float = float("nan")
    hyperparameters: dict = None
    runtime_s: float = 0.0
    trace: TrainingTrace = None
    error: str = None

    @classmethod
    def from_evaluation(cls, algorithm: str, result: Evaluation, **kwargs):
        return cls(algorithm, result.rsqps, result.mean, result.std, **kwargs)

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        """Deterministic content of the row, without wall-clock values."""
        out = {
            "algorithm": self.algorithm,
            "rsqps": list(self.rsqps),
            "mean_rsqp": self.mean if self.ok else None,
            "std_rsqp": self.std if self.ok else None,
            "hyperparameters": self.hyperparameters,
            "error": self.error,
        }
        if self.trace is not None:
            out["trace"] = self.trace.to_dict()
        return out


@dataclass
class ComparisonReport:
    rows: List[TrialResult]
    p_values: List[float]
    seed: int = 0
    baseline: str = BASELINE

    @classmethod
    def from_results(cls, results: List[TrialResult], seed: int = 0):
        """
        Sorts results by mean RSQP (stable, failed rows last) and tests every
        row against the next one.
        """
        ok = [r for r in results if r.ok]
        failed = [r for r in results if not r.ok]
        rows = sorted(ok, key=lambda r: r.mean) + failed
        p_values = [None] * len(rows)
        for i in range(len(ok) - 1):
            a, b = rows[i], rows[i + 1]
            if len(a.rsqps) >= 2 and len(b.rsqps) >= 2:
                p_values[i] = welch_t_test_one_sided(a.rsqps, b.rsqps)
        return cls(rows, p_values, seed)

    def row(self, algorithm: str) -> TrialResult:
        for r in self.rows:
            if r.algorithm == algorithm:
                return r
        raise KeyError(algorithm)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "algorithm": r.algorithm,
                    "mean_rsqp": r.mean,
                    "std_rsqp": r.std,
                    "p_value_vs_next": p,
                    "runtime_s": r.runtime_s,
                    "error": r.error,
                }
                for r, p in zip(self.rows, self.p_values)
            ],
            columns=REPORT_COLUMNS,
        )

    def to_dict(self) -> dict:
        rows = []
        for r, p in zip(self.rows, self.p_values):
            rows.append({**r.to_dict(), "p_value_vs_next": p})
        return {"seed": self.seed, "baseline": self.baseline, "rows": rows}

    def write(self, out_dir: Union[Path, str]):
        """
        Writes ``comparison.csv`` and ``comparison.json`` to `out_dir`.
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(exist_ok=True, parents=True)
        self.to_frame().to_csv(out_dir / "comparison.csv", index=False)
        with open(out_dir / "comparison.json", "w") as f:
            json.dump(self.to_dict(), f, indent=2)
        logging.info(f"ComparisonReport.write: wrote report to {out_dir}")


def _run_baseline(spec, datasets, threads) -> TrialResult:
    sigma = annualized_volatility(spec.garch, spec.env.delta_t)
    policy = DeltaHedgePolicy(spec.env, sigma)
    result = evaluate(policy, datasets.tests, spec.env, threads=threads)
    return TrialResult.from_evaluation(
        BASELINE, result, hyperparameters={"sigma_ann": sigma}
    )


def _run_checkpoint(algorithm, fname, spec, datasets, threads) -> TrialResult:
    try:
        policy, meta = load_agent(fname)
    except CheckpointError as e:
        logging.error(f"compare: {algorithm}: {e}")
        return TrialResult(algorithm, error=str(e))
    if meta.get("env_fingerprint") not in (None, fingerprint(spec.env)):
        warnings.warn(
            f"Checkpoint {fname} was trained in a different environment"
            " configuration."
        )
    config = meta.get("agent_config")
    result = evaluate(policy, datasets.tests, spec.env, threads=threads)
    return TrialResult.from_evaluation(
        algorithm,
        result,
        hyperparameters=config.to_dict() if config is not None else None,
    )


def _run_training(algorithm, config, spec, datasets, stop, threads) -> TrialResult:
    try:
        policy, trace = train(
            algorithm,
            spec.env,
            datasets.as_training_input(),
            agent_config=config,
            budget=spec.budget,
            validation_every=spec.validation_every,
            seed=spec.seed,
            early_stop=stop,
            threads=threads,
        )
    except TrainingDivergenceError as e:
        logging.error(f"compare: {algorithm} diverged: {e}")
        return TrialResult(
            algorithm,
            hyperparameters=config.to_dict(),
            trace=e.trace,
            runtime_s=e.trace.wall_clock if e.trace is not None else 0.0,
            error=f"diverged: {e}",
        )
    result = evaluate(policy, datasets.tests, spec.env, threads=threads)
    return TrialResult.from_evaluation(
        algorithm,
        result,
        hyperparameters=config.to_dict(),
        runtime_s=trace.wall_clock,
        trace=trace,
    )


def compare(
    spec: ExperimentSpec,
    datasets: Datasets = None,
    configs: Mapping[str, AgentConfig] = None,
    checkpoints: Mapping[str, Union[Path, str]] = None,
    policies: Mapping[str, object] = None,
    out_dir: Union[Path, str] = None,
    threads: int = None,
) -> ComparisonReport:
    """
    Trains or loads every algorithm of `spec`, evaluates it on the test sets
    and builds the comparison report.

    Parameters
    ----------
    spec : ExperimentSpec
        Experiment configuration.
    datasets : Datasets, optional
        Path sets to use. Generated from `spec` if not given.
    configs : dict, optional
        Agent configs per algorithm (e.g. grid search results). Algorithms
        without an entry use ``spec.agent_config``.
    checkpoints : dict, optional
        Agent checkpoint file per algorithm. These algorithms are loaded
        instead of trained; a missing or corrupt file gives an error row.
    policies : dict, optional
        Additional already trained policies by row name.
    out_dir : Path or str, optional
        Where to write ``comparison.csv`` and ``comparison.json``.
    threads : int, optional
        Number of algorithms handled in parallel.

    Returns
    -------
    report : ComparisonReport
    """
    configs = dict(configs or {})
    checkpoints = dict(checkpoints or {})
    if datasets is None:
        datasets = generate_datasets(spec, threads=threads)
    baseline_policy = DeltaHedgePolicy(
        spec.env, annualized_volatility(spec.garch, spec.env.delta_t)
    )
    baseline_validation = validation_rsqp(
        baseline_policy, datasets.validation, spec.env, threads
    )
    stop = early_stop_rule(baseline_validation)
    workers = n_threads(threads)
    inner = 1 if workers > 1 else threads

    def run(algorithm):
        logging.info(f"compare: evaluating {algorithm}")
        if algorithm == BASELINE:
            return _run_baseline(spec, datasets, inner)
        if algorithm in checkpoints:
            return _run_checkpoint(
                algorithm, checkpoints[algorithm], spec, datasets, inner
            )
        config = configs.get(algorithm) or spec.agent_config(algorithm)
        return _run_training(algorithm, config, spec, datasets, stop, inner)

    names = list(spec.algorithms)
    names += [name for name in checkpoints if name not in names]
    results = ordered_map(run, names, threads=workers)
    for name, policy in (policies or {}).items():
        result = evaluate(policy, datasets.tests, spec.env, threads=threads)
        results.append(TrialResult.from_evaluation(name, result))

    report = ComparisonReport.from_results(results, seed=spec.seed)
    for r, p in zip(report.rows, report.p_values):
        if r.ok:
            p_text = "-" if p is None else f"{p:.4f}"
            logging.info(
                f"compare: {r.algorithm:<12} {r.mean:.4f} ({r.std:.4f})"
                f" p={p_text} {r.runtime_s:.1f}s"
            )
    if out_dir is not None:
        report.write(out_dir)
    return report
