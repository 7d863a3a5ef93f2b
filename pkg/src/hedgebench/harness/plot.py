import logging
import numpy as np
import pandas as pd
from pathlib import Path
from typing import Mapping, Tuple, Union

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    _enable_plots = True
except ImportError as e:  # pragma: no cover
    logging.warning(f"plot: matplotlib not available: {e}")
    _enable_plots = False

from ..exceptions import PlottingError
from ..hedging.env import EnvConfig, run_episode
from ..market.paths import PricePath


def position_table(
    policies: Mapping[str, object], path: PricePath, config: EnvConfig
) -> pd.DataFrame:
    """
    Price path and positions of several policies on one episode.

    Row t holds S_t and, per policy, the position X_{t+1} chosen at t in a
    column ``X_<name>``. The last row (t = T) only holds the final price.
    """
    table = pd.DataFrame(
        {"t": np.arange(config.horizon + 1), "S_t": np.asarray(path.prices)}
    )
    for name, policy in policies.items():
        record = run_episode(policy, path, config)
        table[f"X_{name}"] = np.append(record.positions, np.nan)
    return table


def emit_position_plot(
    policies: Mapping[str, object],
    path: PricePath,
    config: EnvConfig,
    out: Union[Path, str],
) -> Tuple[Path, Path]:
    """
    Plots the hedge positions of several policies on one price path.

    The price goes on the left axis, the positions on the right axis. Next to
    the figure, the plotted numbers are written as CSV.

    Parameters
    ----------
    policies : dict
        Policies by name, may be empty.
    path : PricePath
        Episode to plot.
    config : EnvConfig
        Environment configuration.
    out : Path or str
        Figure file, the suffix is replaced by ``.svg`` and ``.csv``.

    Returns
    -------
    svg, csv : Path
        Written files.
    """
    if not _enable_plots:  # pragma: no cover
        raise PlottingError("matplotlib is required but not installed.")
    out = Path(out)
    out.parent.mkdir(exist_ok=True, parents=True)
    svg, csv = out.with_suffix(".svg"), out.with_suffix(".csv")

    table = position_table(policies, path, config)
    table.to_csv(csv, index=False)

    fig, ax_price = plt.subplots(figsize=(8, 4.5))
    ax_price.plot(table["t"], table["S_t"], color="black", label="S_t")
    ax_price.axhline(config.strike, color="grey", linestyle=":", linewidth=1)
    ax_price.set_xlabel("t")
    ax_price.set_ylabel("price")
    if policies:
        ax_pos = ax_price.twinx()
        for name in policies:
            ax_pos.step(
                table["t"], table[f"X_{name}"], where="post", label=f"X ({name})"
            )
        ax_pos.set_ylim(-0.05, 1.05)
        ax_pos.set_ylabel("position")
        ax_pos.legend(loc="upper right")
    ax_price.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(svg, format="svg")
    plt.close(fig)
    logging.info(f"emit_position_plot: wrote {svg} and {csv}")
    return svg, csv
