import logging
import numpy as np
import pandas as pd
from pathlib import Path
import time
from tqdm.auto import tqdm
from typing import Tuple, Union

from ..agents.base import AgentConfig
from ..agents.train import train
from ..baseline.delta_hedge import run_delta_hedge
from ..exceptions import ConfigurationError, TrainingDivergenceError
from ..hedging.env import rsqp
from ..utils import n_threads, ordered_map
from .datasets import Datasets
from .evaluation import early_stop_rule
from .spec import ExperimentSpec

GRID_COLUMNS = [
    "learning_rate",
    "batch_size",
    "hidden_layers",
    "hidden_size",
    "validation_rsqp",
    "updates",
    "early_stopped",
    "runtime_s",
    "diverged",
]


def _rank_key(row) -> tuple:
    # lower RSQP, then smaller width, fewer layers, smaller batch, larger rate
    return (
        row["validation_rsqp"],
        row["hidden_size"],
        row["hidden_layers"],
        row["batch_size"],
        -row["learning_rate"],
    )


def grid_search(
    spec: ExperimentSpec,
    algorithm: str,
    datasets: Datasets,
    threads: int = None,
    progress: bool = False,
    out_dir: Union[Path, str] = None,
) -> Tuple[AgentConfig, pd.DataFrame]:
    """
    Hyperparameter grid search for one algorithm.

    One training run with the tuning budget of `spec` is done per grid cell,
    with early stopping against the validation RSQP of the delta hedge.
    Cells that diverge are kept in the table with an infinite RSQP.

    Parameters
    ----------
    spec : ExperimentSpec
        Experiment configuration, provides grid, budgets and seed.
    algorithm : str
        Algorithm to tune.
    datasets : Datasets
        Training and validation paths.
    threads : int, optional
        Number of cells trained in parallel.
    progress : bool, optional (default: False)
        Show a progress bar over the cells.
    out_dir : Path or str, optional
        If given, the table is written to ``gridsearch_<algorithm>.csv``.

    Returns
    -------
    best : AgentConfig
        Config of the best cell.
    table : pd.DataFrame
        One row per cell in grid order, with a ``rank`` column (0 is best).
    """
    cells = spec.grid.cells()
    if len(cells) == 0:
        raise ConfigurationError("grid_search: empty grid")
    baseline = rsqp(run_delta_hedge(datasets.validation, spec.env, threads=threads))
    stop = early_stop_rule(baseline)
    logging.info(
        f"grid_search: {len(cells)} cells for {algorithm},"
        f" baseline validation RSQP {baseline:.5f}"
    )

    def run_cell(cell):
        lr, batch, layers, width = cell
        config = spec.agent_config(
            algorithm,
            learning_rate=lr,
            batch_size=batch,
            hidden_layers=layers,
            hidden_size=width,
        )
        start = time.perf_counter()
        try:
            _, trace = train(
                algorithm,
                spec.env,
                datasets.as_training_input(),
                agent_config=config,
                budget=spec.tuning_budget,
                validation_every=spec.validation_every,
                seed=spec.seed,
                early_stop=stop,
                threads=1,
            )
            value, updates = trace.best_rsqp, trace.updates_done
            early, diverged = trace.early_stopped, False
        except TrainingDivergenceError as e:
            logging.warning(f"grid_search: cell {cell} diverged: {e}")
            value, early, diverged = np.inf, False, True
            updates = e.trace.updates_done if e.trace is not None else 0
        pbar.update(1)
        return {
            "learning_rate": lr,
            "batch_size": batch,
            "hidden_layers": layers,
            "hidden_size": width,
            "validation_rsqp": float(value),
            "updates": updates,
            "early_stopped": early,
            "runtime_s": time.perf_counter() - start,
            "diverged": diverged,
        }

    with tqdm(total=len(cells), disable=not progress, desc=algorithm) as pbar:
        rows = ordered_map(run_cell, cells, threads=n_threads(threads))

    table = pd.DataFrame(rows, columns=GRID_COLUMNS)
    order = sorted(range(len(rows)), key=lambda i: _rank_key(rows[i]))
    table["rank"] = np.argsort(order)
    winner = rows[order[0]]
    best = spec.agent_config(
        algorithm,
        learning_rate=winner["learning_rate"],
        batch_size=int(winner["batch_size"]),
        hidden_layers=int(winner["hidden_layers"]),
        hidden_size=int(winner["hidden_size"]),
    )
    n_beat = int((table["validation_rsqp"] < baseline).sum())
    logging.info(
        f"grid_search: best cell for {algorithm} has validation RSQP"
        f" {winner['validation_rsqp']:.5f}; {n_beat}/{len(cells)} cells beat"
        " the baseline"
    )
    if out_dir is not None:
        fname = Path(out_dir) / f"gridsearch_{algorithm}.csv"
        table.to_csv(fname, index_label="cell")
        logging.info(f"grid_search: wrote {fname}")
    return best, table
