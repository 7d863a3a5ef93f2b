"""
Experiment configuration.

An ``ExperimentSpec`` is built from one of two presets (``paper`` with the
full-size data sets and budgets, ``desk`` for a desktop CPU) and optionally
overridden by a JSON or YAML file mirroring its structure, e.g.::

    {
        "seed": 7,
        "sizes": {"train": 32768, "validation": 8192},
        "env": {"strike": 100.0, "r_f": 0.0},
        "garch": {"mu": 0.0053341, "nu0": 0.00018216},
        "algorithms": ["mcpg", "bsdh"],
        "grid": {"learning_rates": [1e-4, 1e-5]},
        "agents": {"mcpg": {"learning_rate": 1e-4}}
    }

Unknown keys raise a ``ConfigurationError``.
"""

from dataclasses import asdict, dataclass, field, fields, replace
import itertools
import json
from pathlib import Path
from typing import Dict, List, Mapping, Tuple, Union
import yaml

from ..agents.base import ALGORITHMS, AgentConfig
from ..exceptions import ConfigurationError
from ..hedging.env import EnvConfig
from ..market.params import GjrGarchParams
from ..utils import reject_unknown_keys

BASELINE = "bsdh"
SCALES = ("paper", "desk")


@dataclass(frozen=True)
class DatasetSizes:
    train: int
    validation: int
    n_test_sets: int
    test_size: int

    def __post_init__(self):
        for f in fields(self):
            if int(getattr(self, f.name)) < 1:
                raise ConfigurationError(f"sizes.{f.name} must be >= 1")

    @property
    def total(self) -> int:
        return self.train + self.validation + self.n_test_sets * self.test_size


@dataclass(frozen=True)
class HyperparameterGrid:
    learning_rates: Tuple[float, ...] = (1e-3, 1e-4, 1e-5)
    batch_sizes: Tuple[int, ...] = (64, 128, 256)
    hidden_layer_counts: Tuple[int, ...] = (2, 3, 4)
    hidden_sizes: Tuple[int, ...] = (64, 128, 256)

    def __post_init__(self):
        for f in fields(self):
            values = tuple(getattr(self, f.name))
            if not values:
                raise ConfigurationError(f"grid.{f.name} must not be empty")
            object.__setattr__(self, f.name, values)

    def cells(self) -> List[Tuple[float, int, int, int]]:
        """All (learning rate, batch size, layers, width) combinations."""
        return list(
            itertools.product(
                self.learning_rates,
                self.batch_sizes,
                self.hidden_layer_counts,
                self.hidden_sizes,
            )
        )

    def __len__(self):
        return len(self.cells())


@dataclass(frozen=True)
class ExperimentSpec:
    """
    Everything needed to reproduce an experiment.

    Attributes
    ----------
    env : EnvConfig
        Hedging environment.
    garch : GjrGarchParams
        Market model used for all data sets.
    sizes : DatasetSizes
        Number of training, validation and test paths.
    algorithms : tuple of str
        Algorithms to compare, ``"bsdh"`` denotes the delta hedge.
    grid : HyperparameterGrid
        Grid for the hyperparameter search.
    budget : int
        Update budget of final training runs.
    tuning_budget : int
        Update budget per grid cell.
    validation_every : int
        Validation interval in updates.
    seed : int
        Master seed for data sets and training.
    agents : dict
        Per-algorithm overrides of ``AgentConfig`` fields.
    """

    env: EnvConfig = field(default_factory=EnvConfig)
    garch: GjrGarchParams = field(default_factory=GjrGarchParams)
    sizes: DatasetSizes = field(
        default_factory=lambda: DatasetSizes(2**15, 2**13, 5, 2**13)
    )
    algorithms: Tuple[str, ...] = ALGORITHMS + (BASELINE,)
    grid: HyperparameterGrid = field(default_factory=HyperparameterGrid)
    budget: int = 20000
    tuning_budget: int = 10000
    validation_every: int = 1000
    seed: int = 0
    agents: Dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        for name in self.algorithms:
            if name not in ALGORITHMS and name != BASELINE:
                raise ConfigurationError(f"Unknown algorithm '{name}'")
        for name, overrides in self.agents.items():
            if name not in ALGORITHMS:
                raise ConfigurationError(f"agents: unknown algorithm '{name}'")
            reject_unknown_keys(
                overrides, [f.name for f in fields(AgentConfig)], f"agents.{name}"
            )
        if self.budget < 0 or self.tuning_budget < 0 or self.validation_every < 1:
            raise ConfigurationError("Invalid budget or validation interval")
        if self.env.horizon < 1:
            raise ConfigurationError("env.horizon must be >= 1")

    @classmethod
    def paper(cls) -> "ExperimentSpec":
        """Full-size data sets and budgets."""
        return cls(
            sizes=DatasetSizes(2**19, 2**17, 10, 2**17),
            budget=500_000,
            tuning_budget=200_000,
        )

    @classmethod
    def desk(cls) -> "ExperimentSpec":
        """Scaled-down setting that runs on a desktop CPU."""
        return cls()

    @classmethod
    def preset(cls, scale: str) -> "ExperimentSpec":
        if scale not in SCALES:
            raise ConfigurationError(f"Unknown scale '{scale}', choose from {SCALES}")
        return cls.paper() if scale == "paper" else cls.desk()

    def agent_config(self, algorithm: str, **overrides) -> AgentConfig:
        """
        Best known config of `algorithm` with the overrides of this spec and
        the given keyword overrides applied.
        """
        kwargs = dict(self.agents.get(algorithm, {}))
        kwargs.update(overrides)
        return AgentConfig.for_algorithm(algorithm, **kwargs)

    def with_overrides(self, data: Mapping) -> "ExperimentSpec":
        """
        New spec with the fields in `data` (nested dicts) replaced.
        """
        reject_unknown_keys(data, [f.name for f in fields(self)], "experiment spec")
        changes = {}
        garch = self.garch
        if "garch" in data:
            merged = {**garch.to_dict(), **_alias_lambda(data["garch"])}
            garch = GjrGarchParams.from_dict(merged)
            changes["garch"] = garch
        if "env" in data or "garch" in data:
            env_data = dict(data.get("env", {}))
            reject_unknown_keys(env_data, [f.name for f in fields(EnvConfig)], "env")
            merged = {**self.env.to_dict(), **env_data}
            if "premium" not in env_data:
                merged.pop("premium")
                changes["env"] = EnvConfig.from_market(garch, **merged)
            else:
                changes["env"] = EnvConfig(**merged)
        if "sizes" in data:
            reject_unknown_keys(
                data["sizes"], [f.name for f in fields(DatasetSizes)], "sizes"
            )
            changes["sizes"] = replace(self.sizes, **data["sizes"])
        if "grid" in data:
            reject_unknown_keys(
                data["grid"], [f.name for f in fields(HyperparameterGrid)], "grid"
            )
            changes["grid"] = replace(self.grid, **data["grid"])
        for key in ("algorithms", "budget", "tuning_budget", "validation_every"):
            if key in data:
                changes[key] = data[key]
        if "seed" in data:
            changes["seed"] = int(data["seed"])
        if "agents" in data:
            changes["agents"] = {k: dict(v) for k, v in data["agents"].items()}
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["garch"] = self.garch.to_dict()
        out["algorithms"] = list(self.algorithms)
        out["grid"] = {k: list(v) for k, v in out["grid"].items()}
        return out


def _alias_lambda(data: Mapping) -> dict:
    data = dict(data)
    if "lambda" in data:
        data["lam"] = data.pop("lambda")
    return data


def read_config_file(fname: Union[Path, str]) -> dict:
    """
    Reads a JSON (``.json``) or YAML (``.yml``, ``.yaml``) config file.
    """
    fname = Path(fname)
    if not fname.exists():
        raise ConfigurationError(f"Config file not found: {fname}")
    with open(fname, "r") as f:
        if fname.suffix in (".yml", ".yaml"):
            data = yaml.safe_load(f)
        elif fname.suffix == ".json":
            data = json.load(f)
        else:
            raise ConfigurationError(
                f"Unsupported config format '{fname.suffix}', use .json or .yaml"
            )
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{fname}: top level must be a mapping")
    return data


def load_spec(
    fname: Union[Path, str] = None, scale: str = "desk", seed: int = None
) -> ExperimentSpec:
    """
    Experiment spec from a preset, a config file and a seed override.

    Parameters
    ----------
    fname : Path or str, optional
        JSON or YAML file with overrides.
    scale : str, optional (default: "desk")
        Preset, "paper" or "desk".
    seed : int, optional
        Overrides the master seed.
    """
    spec = ExperimentSpec.preset(scale)
    if fname is not None:
        spec = spec.with_overrides(read_config_file(fname))
    if seed is not None:
        spec = replace(spec, seed=int(seed))
    return spec
