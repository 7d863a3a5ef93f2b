"""
Reverse-mode automatic differentiation on numpy arrays.

A ``Tape`` records every primitive operation as a node in an append-only
list. Each node stores its forward value and a vector-Jacobian product
closure. ``Tape.backward`` walks the list in reverse order from a scalar
root and returns the adjoints of all registered parameters, in registration
order.

Operations work on whole arrays with numpy broadcasting, so a batch of
episodes is differentiated in one pass. Adjoints of broadcast inputs are
summed back to the input shape.
"""

import logging
import numpy as np
from typing import Callable, List, NamedTuple, Sequence, Tuple, Union

from ..exceptions import ContractError


ArrayLike = Union[np.ndarray, float, int]


class _Node(NamedTuple):
    op: str
    inputs: Tuple[int, ...]
    vjp: Callable


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    # sum out leading axes added by broadcasting
    ndiff = grad.ndim - len(shape)
    if ndiff > 0:
        grad = grad.sum(axis=tuple(range(ndiff)))
    # sum over axes that had size 1 in the input
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Var:
    """
    Handle to a node on a tape.
    """

    __slots__ = ("tape", "index")
    # numpy operands defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, tape: "Tape", index: int):
        self.tape = tape
        self.index = index

    @property
    def value(self) -> np.ndarray:
        return self.tape.values[self.index]

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other):
        return self.tape.add(self, other)

    def __radd__(self, other):
        return self.tape.add(other, self)

    def __sub__(self, other):
        return self.tape.sub(self, other)

    def __rsub__(self, other):
        return self.tape.sub(other, self)

    def __mul__(self, other):
        return self.tape.mul(self, other)

    def __rmul__(self, other):
        return self.tape.mul(other, self)

    def __truediv__(self, other):
        return self.tape.div(self, other)

    def __rtruediv__(self, other):
        return self.tape.div(other, self)

    def __neg__(self):
        return self.tape.neg(self)

    def __matmul__(self, other):
        return self.tape.matmul(self, other)

    def __getitem__(self, key):
        return self.tape.take(self, key)

    def __repr__(self):
        op = self.tape.nodes[self.index].op
        return f"Var(op={op}, shape={self.shape})"


class Tape:
    """
    Append-only record of primitive operations.

    Nodes are stored in creation order, so the inputs of a node always
    precede it. Parameters are registered with ``parameter`` and receive
    gradients in ``backward``; everything created with ``constant`` (or plain
    numpy values passed to an operation) is treated as fixed.
    """

    def __init__(self):
        self.reset()

    def reset(self):
        self.nodes: List[_Node] = []
        self.values: List[np.ndarray] = []
        self.adjoints: List[np.ndarray] = []
        self.param_indices: List[int] = []

    def __len__(self):
        return len(self.nodes)

    # ---------------------------------------------------------------------
    # leaves

    def _record(self, op, value, inputs=(), vjp=None) -> Var:
        self.nodes.append(_Node(op, tuple(inputs), vjp))
        self.values.append(value)
        return Var(self, len(self.nodes) - 1)

    def constant(self, value: ArrayLike) -> Var:
        return self._record("const", np.asarray(value, dtype=np.float64))

    def parameter(self, value: ArrayLike) -> Var:
        var = self._record("param", np.asarray(value, dtype=np.float64))
        self.param_indices.append(var.index)
        return var

    def _lift(self, x) -> Var:
        if isinstance(x, Var):
            if x.tape is not self:
                raise ContractError("Variable belongs to a different tape")
            return x
        return self.constant(x)

    # ---------------------------------------------------------------------
    # elementwise binary operations

    def add(self, a, b) -> Var:
        a, b = self._lift(a), self._lift(b)
        sa, sb = a.shape, b.shape

        def vjp(g):
            return _unbroadcast(g, sa), _unbroadcast(g, sb)

        return self._record("add", a.value + b.value, (a.index, b.index), vjp)

    def sub(self, a, b) -> Var:
        a, b = self._lift(a), self._lift(b)
        sa, sb = a.shape, b.shape

        def vjp(g):
            return _unbroadcast(g, sa), _unbroadcast(-g, sb)

        return self._record("sub", a.value - b.value, (a.index, b.index), vjp)

    def mul(self, a, b) -> Var:
        a, b = self._lift(a), self._lift(b)
        va, vb = a.value, b.value

        def vjp(g):
            return _unbroadcast(g * vb, va.shape), _unbroadcast(g * va, vb.shape)

        return self._record("mul", va * vb, (a.index, b.index), vjp)

    def div(self, a, b) -> Var:
        a, b = self._lift(a), self._lift(b)
        va, vb = a.value, b.value
        out = va / vb

        def vjp(g):
            return (
                _unbroadcast(g / vb, va.shape),
                _unbroadcast(-g * out / vb, vb.shape),
            )

        return self._record("div", out, (a.index, b.index), vjp)

    def maximum(self, a, b) -> Var:
        a, b = self._lift(a), self._lift(b)
        va, vb = a.value, b.value
        # ties go to the second argument, so maximum(x, 0) has zero slope at 0
        mask = va > vb

        def vjp(g):
            return (
                _unbroadcast(g * mask, va.shape),
                _unbroadcast(g * ~mask, vb.shape),
            )

        return self._record("max", np.where(mask, va, vb), (a.index, b.index), vjp)

    def minimum(self, a, b) -> Var:
        a, b = self._lift(a), self._lift(b)
        va, vb = a.value, b.value
        # ties go to the first argument
        mask = va <= vb

        def vjp(g):
            return (
                _unbroadcast(g * mask, va.shape),
                _unbroadcast(g * ~mask, vb.shape),
            )

        return self._record("min", np.where(mask, va, vb), (a.index, b.index), vjp)

    def matmul(self, a, b) -> Var:
        a, b = self._lift(a), self._lift(b)
        va, vb = a.value, b.value

        def vjp(g):
            if va.ndim == 1:
                ga = vb @ g
                gb = np.outer(va, g)
            else:
                ga = g @ vb.T
                gb = va.T @ g
            return ga, gb

        return self._record("matmul", va @ vb, (a.index, b.index), vjp)

    # ---------------------------------------------------------------------
    # elementwise unary operations

    def neg(self, a) -> Var:
        a = self._lift(a)
        return self._record("neg", -a.value, (a.index,), lambda g: (-g,))

    def square(self, a) -> Var:
        a = self._lift(a)
        va = a.value
        return self._record("square", va * va, (a.index,), lambda g: (2.0 * va * g,))

    def relu(self, a) -> Var:
        a = self._lift(a)
        mask = a.value > 0
        return self._record(
            "relu", np.where(mask, a.value, 0.0), (a.index,), lambda g: (g * mask,)
        )

    def tanh(self, a) -> Var:
        a = self._lift(a)
        out = np.tanh(a.value)
        return self._record("tanh", out, (a.index,), lambda g: (g * (1.0 - out**2),))

    def logistic(self, a) -> Var:
        a = self._lift(a)
        out = logistic(a.value)
        return self._record(
            "logistic", out, (a.index,), lambda g: (g * out * (1.0 - out),)
        )

    def exp(self, a) -> Var:
        a = self._lift(a)
        out = np.exp(a.value)
        return self._record("exp", out, (a.index,), lambda g: (g * out,))

    def log(self, a) -> Var:
        a = self._lift(a)
        va = a.value
        return self._record("log", np.log(va), (a.index,), lambda g: (g / va,))

    def sqrt(self, a) -> Var:
        a = self._lift(a)
        out = np.sqrt(a.value)
        return self._record("sqrt", out, (a.index,), lambda g: (0.5 * g / out,))

    def clip(self, a, lo: float, hi: float) -> Var:
        a = self._lift(a)
        va = a.value
        mask = (va >= lo) & (va <= hi)
        return self._record(
            "clip", np.clip(va, lo, hi), (a.index,), lambda g: (g * mask,)
        )

    # ---------------------------------------------------------------------
    # reductions and structural operations

    def sum(self, a, axis=None) -> Var:
        a = self._lift(a)
        shape = a.shape

        def vjp(g):
            if axis is not None:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return self._record("sum", a.value.sum(axis=axis), (a.index,), vjp)

    def mean(self, a, axis=None) -> Var:
        a = self._lift(a)
        shape = a.shape
        n = a.value.size if axis is None else shape[axis]

        def vjp(g):
            if axis is not None:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g / n, shape).copy(),)

        return self._record("mean", a.value.mean(axis=axis), (a.index,), vjp)

    def take(self, a, key) -> Var:
        """Basic or advanced indexing, ``a[key]``."""
        a = self._lift(a)
        shape = a.shape

        def vjp(g):
            out = np.zeros(shape)
            np.add.at(out, key, g)
            return (out,)

        return self._record("take", a.value[key], (a.index,), vjp)

    def select(self, a, indices: np.ndarray) -> Var:
        """
        Picks one entry per row: ``out[i] = a[i, indices[i]]``.
        """
        a = self._lift(a)
        rows = np.arange(a.shape[0])
        return self.take(a, (rows, np.asarray(indices, dtype=int)))

    def concat(self, parts: Sequence, axis: int = -1) -> Var:
        parts = [self._lift(p) for p in parts]
        values = [p.value for p in parts]
        sizes = [v.shape[axis] for v in values]
        splits = np.cumsum(sizes)[:-1]

        def vjp(g):
            return tuple(np.split(g, splits, axis=axis))

        return self._record(
            "concat",
            np.concatenate(values, axis=axis),
            [p.index for p in parts],
            vjp,
        )

    def reshape(self, a, shape) -> Var:
        a = self._lift(a)
        orig = a.shape
        return self._record(
            "reshape", a.value.reshape(shape), (a.index,), lambda g: (g.reshape(orig),)
        )

    # ---------------------------------------------------------------------
    # reverse pass

    def backward(self, root: Var) -> List[np.ndarray]:
        """
        Reverse pass from a scalar root.

        Parameters
        ----------
        root : Var
            Scalar node recorded on this tape.

        Returns
        -------
        grads : list of np.ndarray
            Gradient of the root with respect to every registered parameter,
            in registration order. Parameters that the root does not depend
            on get zero gradients.
        """
        if not isinstance(root, Var) or root.tape is not self:
            raise ContractError("backward: root must be a node on this tape")
        if root.value.size != 1:
            raise ContractError(
                f"backward: root must be a scalar, got shape {root.shape}"
            )
        n = root.index + 1
        adjoints = [None] * len(self.nodes)
        adjoints[root.index] = np.ones_like(root.value)
        for i in range(n - 1, -1, -1):
            g = adjoints[i]
            node = self.nodes[i]
            if g is None or node.vjp is None:
                continue
            for j, gj in zip(node.inputs, node.vjp(g)):
                if adjoints[j] is None:
                    adjoints[j] = gj
                else:
                    adjoints[j] = adjoints[j] + gj
        self.adjoints = [
            np.zeros_like(v) if a is None else a
            for a, v in zip(adjoints, self.values)
        ]
        logging.debug(f"backward: reverse pass over {n} nodes")
        return [self.adjoints[i] for i in self.param_indices]


def logistic(x: np.ndarray) -> np.ndarray:
    """
    Numerically stable logistic function, maps R to (0, 1).
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
