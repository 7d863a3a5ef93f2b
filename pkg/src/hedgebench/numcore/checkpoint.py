"""
JSON checkpoints for networks.

Field order of a network document::

    {
        "layer_sizes": [3, 64, 64, 1],
        "activation": "relu",
        "output_head": "logistic",
        "weights": [...],        # W0 (row-major), b0, W1, b1, ...
        "optimizer": "adam",
        "step_count": 1234
    }

Floats are written with Python's shortest round-trip representation, so
loading a checkpoint restores every 64-bit weight bit-exactly.
"""

import json
import numpy as np
from pathlib import Path
from typing import Mapping, Tuple, Union

from ..exceptions import CheckpointError
from .mlp import Mlp
from .optim import OptimizerState


def network_to_dict(net: Mlp, optimizer: OptimizerState = None) -> dict:
    return {
        "layer_sizes": list(net.layer_sizes),
        "activation": net.activation,
        "output_head": net.output_head,
        "weights": [float(x) for x in net.get_flat()],
        "optimizer": None if optimizer is None else optimizer.kind,
        "step_count": 0 if optimizer is None else int(optimizer.step_count),
    }


def network_from_dict(doc: Mapping) -> Tuple[Mlp, OptimizerState]:
    try:
        net = Mlp(
            doc["layer_sizes"],
            activation=doc["activation"],
            output_head=doc["output_head"],
        )
        net.set_flat(np.array(doc["weights"], dtype=np.float64))
    except KeyError as e:
        raise CheckpointError(f"Network checkpoint misses field {e}")
    optimizer = None
    if doc.get("optimizer") is not None:
        # moments are not stored; a resumed optimizer restarts them at zero
        optimizer = OptimizerState(kind=doc["optimizer"])
        optimizer.step_count = int(doc.get("step_count", 0))
    return net, optimizer


def save_network(
    net: Mlp, fname: Union[Path, str], optimizer: OptimizerState = None
):
    fname = Path(fname)
    fname.parent.mkdir(exist_ok=True, parents=True)
    with open(fname, "w") as f:
        json.dump(network_to_dict(net, optimizer), f)


def load_network(fname: Union[Path, str]) -> Tuple[Mlp, OptimizerState]:
    fname = Path(fname)
    if not fname.exists():
        raise CheckpointError(f"Checkpoint not found: {fname}")
    with open(fname, "r") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise CheckpointError(f"Corrupt checkpoint {fname}: {e}")
    return network_from_dict(doc)
