"""
Command line interface of the benchmark.

All subcommands share ``--config``, ``--seed``, ``--scale``, ``--out-dir``,
``--algo`` and ``--logfile``. Results are written below ``--out-dir``::

    <out-dir>/data/          simulated path sets (reused if up to date)
    <out-dir>/agents/        trained policies, one JSON checkpoint each
    <out-dir>/gridsearch/    grid tables and best configs
    <out-dir>/comparison.*   comparison report
"""

import argparse
import json
import logging
from pathlib import Path
import sys

from ..agents.base import ALGORITHMS, AgentConfig, load_agent, save_agent
from ..agents.train import train, validation_rsqp
from ..baseline.delta_hedge import DeltaHedgePolicy
from ..market.garch import calibrate_mle
from ..market.params import annualized_volatility, stationary_variance
from ..market.returns import read_returns
from ..utils import str2bool
from .compare import compare
from .datasets import cached_datasets
from .evaluation import early_stop_rule, evaluate
from .gridsearch import grid_search
from .plot import emit_position_plot
from .spec import BASELINE, SCALES, load_spec


class HedgeBenchArgumentParser(argparse.ArgumentParser):
    def __init__(self):
        super().__init__(
            prog="hedgebench",
            description="Deep hedging benchmark of reinforcement learning agents.",
        )
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument(
            "--config",
            default=None,
            help="JSON or YAML file with overrides of the experiment preset.",
        )
        common.add_argument(
            "--seed", type=int, default=None, help="Master seed of the experiment."
        )
        common.add_argument(
            "--scale",
            choices=SCALES,
            default="desk",
            help="Preset for data set sizes and budgets. Default is 'desk'.",
        )
        common.add_argument(
            "--out-dir",
            default=".",
            help="Directory for data sets, checkpoints and reports.",
        )
        common.add_argument(
            "--algo",
            nargs="+",
            default=None,
            metavar="NAME",
            help=(
                f"Algorithms to process, from {', '.join(ALGORITHMS)} and"
                f" '{BASELINE}'. Default are the algorithms of the config."
            ),
        )
        common.add_argument(
            "--threads",
            type=int,
            default=None,
            help="Number of worker threads, capped by HEDGEBENCH_THREADS.",
        )
        common.add_argument(
            "--progress",
            type=str2bool,
            default=False,
            help="Whether to show progress bars. Default is false.",
        )
        common.add_argument(
            "--logfile",
            default=None,
            help="File for logging output",
        )

        sub = self.add_subparsers(
            dest="command", required=True, parser_class=argparse.ArgumentParser
        )
        simulate = sub.add_parser(
            "simulate", parents=[common], help="Simulate and store the path sets."
        )
        simulate.add_argument(
            "--netcdf",
            action="store_true",
            help="Also export every path set as netCDF.",
        )
        calibrate = sub.add_parser(
            "calibrate",
            parents=[common],
            help="Fit GJR-GARCH(1,1) parameters to a return series.",
        )
        calibrate.add_argument(
            "returns",
            help="CSV file with a 'return' or 'price' column.",
        )
        sub.add_parser("train", parents=[common], help="Train the algorithms.")
        sub.add_parser(
            "gridsearch", parents=[common], help="Tune hyperparameters on the grid."
        )
        sub.add_parser(
            "evaluate",
            parents=[common],
            help="Evaluate trained policies on the test sets.",
        )
        compare_parser = sub.add_parser(
            "compare", parents=[common], help="Build the comparison report."
        )
        compare_parser.add_argument(
            "--use-checkpoints",
            action="store_true",
            help="Load policies from <out-dir>/agents instead of training.",
        )
        plot = sub.add_parser(
            "plot", parents=[common], help="Plot positions on one test path."
        )
        plot.add_argument(
            "--path-index",
            type=int,
            default=0,
            help="Index of the path in the first test set. Default is 0.",
        )


def _algorithms(args, spec, with_baseline=True):
    names = args.algo if args.algo is not None else list(spec.algorithms)
    if not with_baseline:
        names = [n for n in names if n != BASELINE]
    return names


def _baseline_policy(spec):
    return DeltaHedgePolicy(
        spec.env, annualized_volatility(spec.garch, spec.env.delta_t)
    )


def _best_config(out_dir, algorithm):
    fname = Path(out_dir) / "gridsearch" / f"best_{algorithm}.json"
    if not fname.exists():
        return None
    with open(fname, "r") as f:
        return AgentConfig.from_dict(json.load(f))


def _checkpoint(out_dir, algorithm):
    return Path(out_dir) / "agents" / f"{algorithm}.json"


def _policies(args, spec):
    policies = {}
    for name in _algorithms(args, spec):
        if name == BASELINE:
            policies[name] = _baseline_policy(spec)
        else:
            policies[name], _ = load_agent(_checkpoint(args.out_dir, name))
    return policies


def simulate(args, spec):
    data_dir = Path(args.out_dir) / "data"
    datasets = cached_datasets(spec, data_dir, args.threads, args.progress)
    named = {"train": datasets.train, "validation": datasets.validation}
    named.update({f"test_{k:02d}": t for k, t in enumerate(datasets.tests)})
    print(
        f"Stationary variance {stationary_variance(spec.garch):.6e}, annualized"
        f" volatility {annualized_volatility(spec.garch, spec.env.delta_t):.4f}"
    )
    for name, pathset in named.items():
        s = pathset.summary()
        print(
            f"{name:<12} {s['n_paths']:>8} paths, mean log-return"
            f" {s['mean_log_return']:.6f}, annualized vol {s['annualized_vol']:.4f}"
        )
        if args.netcdf:
            pathset.write_netcdf(data_dir / f"{name}.nc")


def calibrate(args, spec):
    returns = read_returns(args.returns)
    params = calibrate_mle(returns.values, init=spec.garch)
    out = Path(args.out_dir)
    out.mkdir(exist_ok=True, parents=True)
    with open(out / "garch_params.json", "w") as f:
        json.dump(params.to_dict(), f, indent=2)
    for key, value in params.to_dict().items():
        print(f"{key:<4} {value:.8f}")
    print(f"persistence {params.persistence:.6f}")


def train_agents(args, spec):
    datasets = cached_datasets(
        spec, Path(args.out_dir) / "data", args.threads, args.progress
    )
    baseline = validation_rsqp(
        _baseline_policy(spec), datasets.validation, spec.env, args.threads
    )
    print(f"{BASELINE:<12} validation RSQP {baseline:.5f}")
    for name in _algorithms(args, spec, with_baseline=False):
        config = _best_config(args.out_dir, name) or spec.agent_config(name)
        policy, trace = train(
            name,
            spec.env,
            datasets.as_training_input(),
            agent_config=config,
            budget=spec.budget,
            validation_every=spec.validation_every,
            seed=spec.seed,
            early_stop=early_stop_rule(baseline),
            threads=args.threads,
            progress=args.progress,
        )
        fname = _checkpoint(args.out_dir, name)
        save_agent(fname, policy, config, spec.env, spec.seed, trace.updates_done)
        with open(fname.with_suffix(".trace.json"), "w") as f:
            json.dump(trace.to_dict(), f, indent=2)
        print(
            f"{name:<12} validation RSQP {trace.best_rsqp:.5f} after"
            f" {trace.updates_done} updates ({trace.wall_clock:.1f}s)"
        )


def gridsearch(args, spec):
    datasets = cached_datasets(
        spec, Path(args.out_dir) / "data", args.threads, args.progress
    )
    out = Path(args.out_dir) / "gridsearch"
    out.mkdir(exist_ok=True, parents=True)
    for name in _algorithms(args, spec, with_baseline=False):
        best, table = grid_search(
            spec, name, datasets, args.threads, args.progress, out_dir=out
        )
        with open(out / f"best_{name}.json", "w") as f:
            json.dump(best.to_dict(), f, indent=2)
        print(
            f"{name:<12} best: lr={best.learning_rate}, batch={best.batch_size},"
            f" {best.hidden_layers}x{best.hidden_size},"
            f" validation RSQP {table['validation_rsqp'].min():.5f}"
        )


def evaluate_agents(args, spec):
    datasets = cached_datasets(
        spec, Path(args.out_dir) / "data", args.threads, args.progress
    )
    for name, policy in _policies(args, spec).items():
        result = evaluate(policy, datasets.tests, spec.env, threads=args.threads)
        print(f"{name:<12} {result.mean:.4f} ({result.std:.4f})")


def compare_agents(args, spec):
    datasets = cached_datasets(
        spec, Path(args.out_dir) / "data", args.threads, args.progress
    )
    names = _algorithms(args, spec)
    spec = spec.with_overrides({"algorithms": names})
    configs, checkpoints = {}, {}
    for name in names:
        if name == BASELINE:
            continue
        if args.use_checkpoints:
            checkpoints[name] = _checkpoint(args.out_dir, name)
        config = _best_config(args.out_dir, name)
        if config is not None:
            configs[name] = config
    report = compare(
        spec,
        datasets=datasets,
        configs=configs,
        checkpoints=checkpoints,
        out_dir=args.out_dir,
        threads=args.threads,
    )
    print(report.to_frame().to_string(index=False))


def plot_positions(args, spec):
    datasets = cached_datasets(
        spec, Path(args.out_dir) / "data", args.threads, args.progress
    )
    path = datasets.tests[0][args.path_index]
    svg, csv = emit_position_plot(
        _policies(args, spec), path, spec.env, Path(args.out_dir) / "positions.svg"
    )
    print(f"Wrote {svg} and {csv}")


HANDLERS = {
    "simulate": simulate,
    "calibrate": calibrate,
    "train": train_agents,
    "gridsearch": gridsearch,
    "evaluate": evaluate_agents,
    "compare": compare_agents,
    "plot": plot_positions,
}


def main(args):
    """
    Runs a subcommand.

    Parameters
    ----------
    args : list of str
        Command line parameters as list of strings.
    """
    parser = HedgeBenchArgumentParser()
    args = parser.parse_args(args)
    logging.basicConfig(level=logging.INFO, filename=args.logfile)
    spec = load_spec(args.config, scale=args.scale, seed=args.seed)
    logging.info(
        f"main: running '{args.command}' with seed {spec.seed} at scale"
        f" '{args.scale}'"
    )
    HANDLERS[args.command](args, spec)


def run():  # pragma: no cover
    main(sys.argv[1:])
