import logging
import numpy as np
import time
from tqdm.auto import tqdm
from typing import Callable, List, Mapping, Tuple

from ..exceptions import ConfigurationError, TrainingDivergenceError
from ..hedging.env import EnvConfig, rsqp, run_episodes
from ..market.paths import PathSet
from .base import AgentConfig, Policy, TrainingTrace
from .ddpg import DdpgTrainer
from .dql import DqlTrainer
from .mcpg import McpgTrainer
from .ppo import PpoTrainer


TRAINERS = {
    "dql": DqlTrainer,
    "double_dql": DqlTrainer,
    "dueling_dql": DqlTrainer,
    "dd_dql": DqlTrainer,
    "mcpg": McpgTrainer,
    "ppo": PpoTrainer,
    "ddpg": DdpgTrainer,
    "td3": DdpgTrainer,
}


def validation_rsqp(
    policy: Policy, validation: PathSet, env_config: EnvConfig, threads: int = None
) -> float:
    return rsqp(run_episodes(policy, validation, env_config, threads=threads))


def train(
    algorithm: str,
    env_config: EnvConfig,
    pathsets: Mapping[str, PathSet],
    agent_config: AgentConfig = None,
    budget: int = 20000,
    validation_every: int = 1000,
    seed: int = 0,
    early_stop: Callable[[List[float]], bool] = None,
    threads: int = None,
    progress: bool = False,
) -> Tuple[Policy, TrainingTrace]:
    """
    Trains a hedging policy.

    Every `validation_every` updates, the RSQP of the current policy on the
    validation paths is recorded and the best policy so far is kept. If the
    last validation did not coincide with the end of the budget, a final
    validation is run.

    Parameters
    ----------
    algorithm : str
        One of "dql", "double_dql", "dueling_dql", "dd_dql", "mcpg", "ppo",
        "ddpg", "td3".
    env_config : EnvConfig
        Environment configuration.
    pathsets : mapping
        Path sets under the keys "train" and "validation".
    agent_config : AgentConfig, optional
        Hyperparameters, default are the best known ones for `algorithm`.
    budget : int, optional (default: 20000)
        Maximum number of updates (optimizer steps).
    validation_every : int, optional (default: 1000)
        Validation interval in updates.
    seed : int, optional (default: 0)
        Seed of network initialization, path sampling and exploration.
    early_stop : callable, optional
        Predicate on the list of validation RSQPs so far. Training stops
        after the first validation for which it returns True.
    threads : int, optional
        Worker threads for validation.
    progress : bool, optional (default: False)
        Whether to show a progress bar.

    Returns
    -------
    policy : Policy
        Policy with the lowest validation RSQP (the initial policy for
        ``budget=0``).
    trace : TrainingTrace

    Raises
    ------
    TrainingDivergenceError
        If a loss, gradient or validation RSQP becomes non-finite. The
        partial trace is attached to the exception.
    """
    if algorithm not in TRAINERS:
        raise ConfigurationError(f"Unknown algorithm '{algorithm}'")
    if agent_config is None:
        agent_config = AgentConfig.for_algorithm(algorithm)
    if agent_config.algorithm != algorithm:
        raise ConfigurationError(
            f"Agent config is for '{agent_config.algorithm}', not '{algorithm}'"
        )
    if budget < 0 or validation_every < 1:
        raise ConfigurationError("Need budget >= 0 and validation_every >= 1")
    try:
        train_set, validation = pathsets["train"], pathsets["validation"]
    except KeyError as e:
        raise ConfigurationError(f"train: missing path set {e}")

    start = time.perf_counter()
    trainer = TRAINERS[algorithm](env_config, train_set, agent_config, seed, budget)
    trace = TrainingTrace()

    def validate():
        value = validation_rsqp(trainer.policy, validation, env_config, threads)
        if not np.isfinite(value):
            raise TrainingDivergenceError(
                f"train: non-finite validation RSQP after {trace.updates_done}"
                " updates"
            )
        trace.record(
            trace.updates_done, value, time.perf_counter() - start, trainer.policy
        )
        logging.info(
            f"train: {algorithm} validation RSQP {value:.5f} after"
            f" {trace.updates_done} updates"
        )

    logging.info(
        f"train: training {algorithm} for up to {budget} updates"
        f" ({agent_config.learning_rate}, {agent_config.batch_size},"
        f" {agent_config.hidden_layers}x{agent_config.hidden_size})"
    )
    next_validation = validation_every
    try:
        with tqdm(total=budget, disable=not progress, desc=algorithm) as pbar:
            while trace.updates_done < budget:
                n = trainer.update(budget - trace.updates_done)
                trace.updates_done += n
                pbar.update(n)
                if trace.updates_done < next_validation:
                    continue
                while next_validation <= trace.updates_done:
                    next_validation += validation_every
                validate()
                if early_stop is not None and early_stop(trace.validation_values):
                    trace.early_stopped = True
                    trace.stopped_at = trace.updates_done
                    logging.info(
                        f"train: early stopping after {trace.updates_done} updates"
                    )
                    break
            last = trace.validation_rsqps[-1][0] if trace.validation_rsqps else None
            if budget > 0 and not trace.early_stopped and last != trace.updates_done:
                validate()
    except TrainingDivergenceError as e:
        trace.wall_clock = time.perf_counter() - start
        e.trace = trace
        logging.error(f"train: {algorithm} diverged: {e}")
        raise
    trace.wall_clock = time.perf_counter() - start

    if trace.best_checkpoint is None:
        return trainer.policy.snapshot(), trace
    return trace.best_checkpoint, trace
