from .tape import Tape, Var, logistic
from .rng import RngStream, gaussian, uniform
from .mlp import Mlp, mlp_forward
from .optim import OptimizerState, optimizer_step
from .checkpoint import (
    network_to_dict,
    network_from_dict,
    save_network,
    load_network,
)


def backward(tape: Tape, root: Var):
    """Gradient of the scalar `root` with respect to all tape parameters."""
    return tape.backward(root)
