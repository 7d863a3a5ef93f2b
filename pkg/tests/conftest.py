import numpy as np
from pathlib import Path
import pytest
import shutil

from hedgebench.hedging.env import EnvConfig
from hedgebench.harness.spec import DatasetSizes, ExperimentSpec, HyperparameterGrid
from hedgebench.market.garch import simulate_paths
from hedgebench.market.params import GjrGarchParams


@pytest.fixture
def test_output_path(tmpdir_factory):
    # see https://stackoverflow.com/questions/51593595
    # for reference
    tmpdir = Path(tmpdir_factory.mktemp("output"))
    yield tmpdir
    shutil.rmtree(str(tmpdir))


@pytest.fixture
def garch_params():
    return GjrGarchParams.sp500_monthly()


@pytest.fixture
def env_config():
    return EnvConfig()


@pytest.fixture(scope="session")
def small_pathset():
    return simulate_paths(GjrGarchParams(), 512, 12, seed=3)


@pytest.fixture(scope="session")
def small_pathsets():
    params = GjrGarchParams()
    return {
        "train": simulate_paths(params, 1024, 12, seed=5, stream_offset=0),
        "validation": simulate_paths(params, 256, 12, seed=5, stream_offset=1024),
    }


def make_tiny_spec(**kwargs):
    """Experiment small enough to run end to end in a few seconds."""
    defaults = dict(
        sizes=DatasetSizes(512, 256, 3, 256),
        algorithms=("mcpg", "bsdh"),
        grid=HyperparameterGrid((1e-3,), (32,), (1,), (8,)),
        budget=20,
        tuning_budget=10,
        validation_every=5,
        seed=11,
    )
    defaults.update(kwargs)
    return ExperimentSpec(**defaults)


@pytest.fixture
def tiny_spec():
    return make_tiny_spec()


def constant_policy(value):
    """Policy that always holds `value` shares."""

    def act(states):
        states = np.atleast_2d(states)
        return np.full(len(states), float(value))

    return act


@pytest.fixture
def tiny_spec_factory():
    return make_tiny_spec


@pytest.fixture
def constant():
    return constant_policy
