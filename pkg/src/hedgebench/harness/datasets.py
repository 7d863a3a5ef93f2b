from dataclasses import asdict, dataclass
import json
import logging
from pathlib import Path
from typing import List, Union

from ..exceptions import CheckpointError
from ..market.garch import simulate_paths
from ..market.paths import PathSet
from ..utils import fingerprint
from .spec import ExperimentSpec


@dataclass
class Datasets:
    train: PathSet
    validation: PathSet
    tests: List[PathSet]

    def as_training_input(self) -> dict:
        return {"train": self.train, "validation": self.validation}


def stream_offsets(spec: ExperimentSpec) -> dict:
    """
    First stream id of every data set. The ranges are disjoint: training
    paths come first, then validation paths, then the test sets in order.
    """
    sizes = spec.sizes
    offsets = {"train": 0, "validation": sizes.train}
    start = sizes.train + sizes.validation
    for k in range(sizes.n_test_sets):
        offsets[f"test_{k:02d}"] = start + k * sizes.test_size
    return offsets


def dataset_fingerprint(spec: ExperimentSpec) -> str:
    """Hash of everything the simulated paths depend on."""
    env = spec.env
    return fingerprint(
        {
            "garch": spec.garch.to_dict(),
            "sizes": asdict(spec.sizes),
            "horizon": env.horizon,
            "s0": env.s0,
            "delta_t": env.delta_t,
            "seed": spec.seed,
        }
    )


def generate_datasets(
    spec: ExperimentSpec,
    out_dir: Union[Path, str] = None,
    threads: int = None,
    progress: bool = False,
) -> Datasets:
    """
    Simulates the training, validation and test path sets of an experiment.

    All sets are generated from the master seed of `spec` with disjoint
    stream id ranges, so each set can be regenerated on its own.

    Parameters
    ----------
    spec : ExperimentSpec
        Experiment configuration.
    out_dir : Path or str, optional
        If given, every set is written to ``<out_dir>/<name>.hbps`` together
        with a manifest ``datasets.json``.
    threads : int, optional
        Worker threads for the simulation.
    progress : bool, optional (default: False)
        Whether to show progress bars.
    """
    env = spec.env
    sizes = {"train": spec.sizes.train, "validation": spec.sizes.validation}
    sizes.update(
        {
            f"test_{k:02d}": spec.sizes.test_size
            for k in range(spec.sizes.n_test_sets)
        }
    )
    sets = {}
    for name, offset in stream_offsets(spec).items():
        sets[name] = simulate_paths(
            spec.garch,
            sizes[name],
            env.horizon,
            s0=env.s0,
            seed=spec.seed,
            delta_t=env.delta_t,
            stream_offset=offset,
            threads=threads,
            progress=progress,
        )
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(exist_ok=True, parents=True)
        for name, pathset in sets.items():
            pathset.save(out_dir / f"{name}.hbps")
        manifest = {
            "seed": spec.seed,
            "fingerprint": dataset_fingerprint(spec),
            "sets": list(sets),
            "offsets": stream_offsets(spec),
        }
        with open(out_dir / "datasets.json", "w") as f:
            json.dump(manifest, f, indent=2)
        logging.info(f"generate_datasets: wrote {len(sets)} path sets to {out_dir}")
    tests = [sets[k] for k in sets if k.startswith("test_")]
    return Datasets(sets["train"], sets["validation"], tests)


def load_datasets(out_dir: Union[Path, str]) -> Datasets:
    """
    Reads path sets written by ``generate_datasets``.
    """
    out_dir = Path(out_dir)
    manifest = out_dir / "datasets.json"
    if not manifest.exists():
        raise CheckpointError(f"No data set manifest in {out_dir}")
    with open(manifest, "r") as f:
        names = json.load(f)["sets"]
    sets = {name: PathSet.load(out_dir / f"{name}.hbps") for name in names}
    tests = [sets[k] for k in names if k.startswith("test_")]
    return Datasets(sets["train"], sets["validation"], tests)


def cached_datasets(
    spec: ExperimentSpec,
    out_dir: Union[Path, str],
    threads: int = None,
    progress: bool = False,
) -> Datasets:
    """
    Loads the data sets of `spec` from `out_dir` if they were written there
    for the same configuration, otherwise generates and writes them.
    """
    out_dir = Path(out_dir)
    manifest = out_dir / "datasets.json"
    if manifest.exists():
        with open(manifest, "r") as f:
            stored = json.load(f).get("fingerprint")
        if stored == dataset_fingerprint(spec):
            logging.info(f"cached_datasets: reading path sets from {out_dir}")
            return load_datasets(out_dir)
        logging.info(f"cached_datasets: regenerating stale path sets in {out_dir}")
    return generate_datasets(spec, out_dir, threads=threads, progress=progress)
