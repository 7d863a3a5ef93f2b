import copy
import numpy as np
from typing import List, Sequence, Union

from ..exceptions import ConfigurationError
from .rng import RngStream, uniform
from .tape import Tape, Var, logistic


ACTIVATIONS = ("relu", "tanh")
OUTPUT_HEADS = ("identity", "logistic")


class Mlp:
    """
    Feed-forward network with a fixed hidden nonlinearity.

    Weights of layer ``i`` have shape ``(n_in, n_out)`` and inputs are row
    vectors, so a batch of states of shape ``(N, n_in)`` is processed in a
    single matrix product per layer.

    Parameters
    ----------
    layer_sizes : sequence of int
        Sizes of all layers, including input and output, e.g.
        ``[3, 64, 64, 1]``.
    activation : str, optional (default: "relu")
        Hidden nonlinearity, "relu" or "tanh".
    output_head : str, optional (default: "identity")
        "identity" for value functions, "logistic" for networks whose output
        must lie in (0, 1).
    stream : RngStream, optional
        Random stream for the weight initialization. If not given, all
        weights are zero.
    """

    def __init__(
        self,
        layer_sizes: Sequence[int],
        activation: str = "relu",
        output_head: str = "identity",
        stream: RngStream = None,
    ):
        layer_sizes = [int(n) for n in layer_sizes]
        if len(layer_sizes) < 2 or any(n <= 0 for n in layer_sizes):
            raise ConfigurationError(f"Invalid layer sizes: {layer_sizes}")
        if activation not in ACTIVATIONS:
            raise ConfigurationError(f"Unknown activation: {activation}")
        if output_head not in OUTPUT_HEADS:
            raise ConfigurationError(f"Unknown output head: {output_head}")
        self.layer_sizes = layer_sizes
        self.activation = activation
        self.output_head = output_head
        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        nlayers = len(layer_sizes) - 1
        for i, (n_in, n_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
            if stream is None:
                w = np.zeros((n_in, n_out))
            else:
                # He-style uniform fan-in scaling for hidden layers, plain
                # fan-in scaling for the output layer
                gain = 6.0 if i < nlayers - 1 else 3.0
                bound = np.sqrt(gain / n_in)
                u = uniform(stream, n_in * n_out).reshape(n_in, n_out)
                w = (2.0 * u - 1.0) * bound
            self.weights.append(w)
            self.biases.append(np.zeros(n_out))

    @classmethod
    def hidden(
        cls,
        n_in: int,
        n_out: int,
        hidden_layers: int,
        hidden_size: int,
        **kwargs,
    ) -> "Mlp":
        """
        Network with `hidden_layers` hidden layers of `hidden_size` units.
        """
        sizes = [n_in] + [hidden_size] * hidden_layers + [n_out]
        return cls(sizes, **kwargs)

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    @property
    def params(self) -> List[np.ndarray]:
        """Parameter arrays in checkpoint order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    @params.setter
    def params(self, arrays: Sequence[np.ndarray]):
        arrays = list(arrays)
        if len(arrays) != 2 * len(self.weights):
            raise ConfigurationError(
                f"Expected {2 * len(self.weights)} arrays, got {len(arrays)}"
            )
        for i in range(len(self.weights)):
            w, b = arrays[2 * i], arrays[2 * i + 1]
            if w.shape != self.weights[i].shape or b.shape != self.biases[i].shape:
                raise ConfigurationError(f"Shape mismatch in layer {i}")
            self.weights[i] = np.array(w, dtype=np.float64)
            self.biases[i] = np.array(b, dtype=np.float64)

    @property
    def n_params(self) -> int:
        return sum(
            (n_in + 1) * n_out
            for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:])
        )

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat: np.ndarray):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.n_params:
            raise ConfigurationError(
                f"Expected {self.n_params} parameters, got {flat.size}"
            )
        arrays = []
        pos = 0
        for p in self.params:
            arrays.append(flat[pos : pos + p.size].reshape(p.shape))
            pos += p.size
        self.params = arrays

    def copy(self) -> "Mlp":
        return copy.deepcopy(self)

    def _check_input(self, x):
        if x.shape[-1] != self.input_size:
            raise ConfigurationError(
                f"Network expects input size {self.input_size},"
                f" got {x.shape[-1]}"
            )

    def forward(
        self,
        x: Union[np.ndarray, Var],
        tape: Tape = None,
        trainable: bool = True,
    ) -> Union[np.ndarray, Var]:
        """
        Forward pass.

        Parameters
        ----------
        x : np.ndarray or Var
            Single input of shape ``(n_in,)`` or batch of shape
            ``(N, n_in)``.
        tape : Tape, optional
            If given, all operations are recorded on the tape and a ``Var``
            is returned.
        trainable : bool, optional (default: True)
            Whether to register the weights as tape parameters. If False,
            the weights enter the tape as constants, e.g. when a critic is
            used to differentiate the actor.

        Returns
        -------
        out : np.ndarray or Var
            Activations of the final layer.
        """
        if tape is None:
            x = np.asarray(x, dtype=np.float64)
            self._check_input(x)
            return self._forward_numpy(x)
        if not isinstance(x, Var):
            x = tape.constant(x)
        self._check_input(x.value)
        leaf = tape.parameter if trainable else tape.constant
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = tape.add(tape.matmul(h, leaf(w)), leaf(b))
            if i < last:
                h = tape.relu(h) if self.activation == "relu" else tape.tanh(h)
        if self.output_head == "logistic":
            h = tape.logistic(h)
        return h

    def _forward_numpy(self, x: np.ndarray) -> np.ndarray:
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0) if self.activation == "relu" else np.tanh(h)
        if self.output_head == "logistic":
            h = logistic(h)
        return h

    __call__ = forward

    def soft_update(self, source: "Mlp", rate: float):
        """
        Moves the weights towards `source`: w <- (1 - rate) w + rate w_src.
        """
        self.params = [
            (1.0 - rate) * p + rate * q for p, q in zip(self.params, source.params)
        ]

    def __repr__(self):
        return (
            f"Mlp(layer_sizes={self.layer_sizes}, activation={self.activation},"
            f" output_head={self.output_head})"
        )


def mlp_forward(net: Mlp, x, tape: Tape = None):
    return net.forward(x, tape=tape)
