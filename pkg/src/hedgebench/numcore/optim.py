from dataclasses import dataclass, field
import numpy as np
from typing import List, Sequence

from ..exceptions import ConfigurationError, TrainingDivergenceError


ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class OptimizerState:
    """
    State of a gradient-based optimizer.

    Parameters
    ----------
    kind : str
        "sgd" or "adam".
    learning_rate : float
        Step size, must be positive.
    m, v : list of np.ndarray
        Adam first and second moments, one array per parameter array. Filled
        with zeros on the first step if empty.
    step_count : int
        Number of steps taken.
    """

    kind: str = "adam"
    learning_rate: float = 1e-3
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    step_count: int = 0

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise ConfigurationError(f"Unknown optimizer kind: {self.kind}")
        if not self.learning_rate >= 0:
            raise ConfigurationError(
                f"Learning rate must be non-negative, got {self.learning_rate}"
            )

    def attach(self, params: Sequence[np.ndarray]) -> "OptimizerState":
        """Initializes zero moments matching `params`."""
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        return self

    @property
    def n_params(self) -> int:
        return sum(m.size for m in self.m)


def optimizer_step(
    state: OptimizerState,
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
) -> List[np.ndarray]:
    """
    Single descent step.

    SGD: ``p - lr * g``. Adam: bias-corrected moment update with
    beta1 = 0.9, beta2 = 0.999 and eps = 1e-8.

    Parameters
    ----------
    state : OptimizerState
        Updated in place (moments, step count).
    params, grads : sequence of np.ndarray
        Parameter arrays and their gradients, aligned.

    Returns
    -------
    params : list of np.ndarray
        New parameter arrays; the inputs are not modified.
    """
    params = list(params)
    grads = list(grads)
    if len(params) != len(grads):
        raise ConfigurationError(
            f"optimizer_step: {len(params)} parameter arrays but"
            f" {len(grads)} gradients"
        )
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ConfigurationError(
                f"optimizer_step: shape mismatch {p.shape} vs {g.shape}"
            )
        if not np.all(np.isfinite(g)):
            raise TrainingDivergenceError(
                "optimizer_step: non-finite values in gradient"
            )
    lr = state.learning_rate
    state.step_count += 1
    if state.kind == "sgd":
        return [p - lr * g for p, g in zip(params, grads)]

    if not state.m:
        state.attach(params)
    elif len(state.m) != len(params) or any(
        m.shape != p.shape for m, p in zip(state.m, params)
    ):
        raise ConfigurationError("optimizer_step: moments do not match parameters")
    t = state.step_count
    c1 = 1.0 - ADAM_BETA1**t
    c2 = 1.0 - ADAM_BETA2**t
    new_params = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * g
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * g * g
        mhat = state.m[i] / c1
        vhat = state.v[i] / c2
        new_params.append(p - lr * mhat / (np.sqrt(vhat) + ADAM_EPS))
    return new_params
