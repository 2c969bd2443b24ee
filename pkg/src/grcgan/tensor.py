"""Reverse-mode automatic differentiation over dense rank-2 arrays.

A :class:`Tensor` wraps a float64 ``numpy`` array of shape ``(rows, cols)``
together with an optional gradient buffer of the same shape.  Operations on
tensors record a computation graph; :func:`backward` walks the graph in
reverse topological order and accumulates gradients into every reachable
tensor that has ``requires_grad`` set.

The engine is strictly first order: nothing here differentiates through a
backward pass, and no operation needs to.  Gradients accumulate across
separate backward calls until explicitly cleared, which is what an optimizer
step cycle expects.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Tensor",
    "as_tensor",
    "backward",
    "add",
    "sub",
    "mul",
    "matmul",
    "neg",
    "scale",
    "sum_all",
    "mean_all",
    "sum_rows",
    "relu",
    "leaky_relu",
    "sigmoid",
    "log",
    "sqrt",
    "clip",
    "minimum",
    "slice_rows",
    "concat_cols",
]


class Tensor:
    """Dense rank-2 float64 array with an optional gradient accumulator."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise ValueError(f"tensors are rank <= 2, got shape {arr.shape}")
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._backward = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() on non-scalar tensor of shape {self.shape}")
        return float(self.data.reshape(())[()])

    def detach(self) -> "Tensor":
        """A view of the same data cut off from the graph."""
        out = Tensor.__new__(Tensor)
        out.data = self.data
        out.grad = None
        out.requires_grad = False
        out._parents = ()
        out._backward = None
        return out

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray, fresh: bool = False) -> None:
        """Add g into the gradient buffer.

        ``fresh=True`` promises g is a newly allocated array no other node
        will touch, letting the first accumulation adopt it without a copy.
        Callers passing a shared or borrowed array must leave fresh unset.
        """
        if self.grad is None:
            self.grad = g if fresh else g.copy()
        else:
            self.grad += g

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # Operator sugar; the module-level functions do the work.
    def __add__(self, other):
        return add(self, as_tensor(other))

    def __radd__(self, other):
        return add(as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, as_tensor(other))

    def __rsub__(self, other):
        return sub(as_tensor(other), self)

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, float(other))
        return mul(self, as_tensor(other))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, as_tensor(other))


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data: np.ndarray, parents: tuple, backward_fn) -> Tensor:
    # Interior nodes of a differentiable graph get requires_grad=True by
    # induction, so a single flag check suffices everywhere below.
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward_fn
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Sum a gradient down to ``shape``, undoing numpy row/col broadcasting."""
    if g.shape == shape:
        return g
    if shape[0] == 1 and g.shape[0] != 1:
        g = g.sum(axis=0, keepdims=True)
    if shape[1] == 1 and g.shape[1] != 1:
        g = g.sum(axis=1, keepdims=True)
    if g.shape != shape:
        raise ValueError(f"cannot reduce gradient {g.shape} to {shape}")
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    def bw(out):
        if a.requires_grad:
            g = _unbroadcast(out.grad, a.shape)
            a.accumulate_grad(g, fresh=g is not out.grad)
        if b.requires_grad:
            g = _unbroadcast(out.grad, b.shape)
            b.accumulate_grad(g, fresh=g is not out.grad)

    return _make(a.data + b.data, (a, b), bw)


def sub(a: Tensor, b: Tensor) -> Tensor:
    def bw(out):
        if a.requires_grad:
            g = _unbroadcast(out.grad, a.shape)
            a.accumulate_grad(g, fresh=g is not out.grad)
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(-out.grad, b.shape), fresh=True)

    return _make(a.data - b.data, (a, b), bw)


def mul(a: Tensor, b: Tensor) -> Tensor:
    def bw(out):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(out.grad * b.data, a.shape), fresh=True)
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(out.grad * a.data, b.shape), fresh=True)

    return _make(a.data * b.data, (a, b), bw)


def neg(a: Tensor) -> Tensor:
    def bw(out):
        a.accumulate_grad(-out.grad, fresh=True)

    return _make(-a.data, (a,), bw)


def scale(a: Tensor, c: float) -> Tensor:
    def bw(out):
        a.accumulate_grad(c * out.grad, fresh=True)

    return _make(c * a.data, (a,), bw)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    def bw(out):
        if a.requires_grad:
            a.accumulate_grad(out.grad @ b.data.T, fresh=True)
        if b.requires_grad:
            b.accumulate_grad(a.data.T @ out.grad, fresh=True)

    return _make(a.data @ b.data, (a, b), bw)


def sum_all(a: Tensor) -> Tensor:
    def bw(out):
        a.accumulate_grad(np.full_like(a.data, out.grad.reshape(())[()]), fresh=True)

    return _make(np.array([[a.data.sum()]]), (a,), bw)


def mean_all(a: Tensor) -> Tensor:
    n = a.data.size

    def bw(out):
        a.accumulate_grad(np.full_like(a.data, out.grad.reshape(())[()] / n), fresh=True)

    return _make(np.array([[a.data.mean()]]), (a,), bw)


def sum_rows(a: Tensor) -> Tensor:
    """Row sums, shape (m, 1)."""

    def bw(out):
        a.accumulate_grad(np.broadcast_to(out.grad, a.shape).copy(), fresh=True)

    return _make(a.data.sum(axis=1, keepdims=True), (a,), bw)


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0

    def bw(out):
        a.accumulate_grad(out.grad * mask, fresh=True)

    return _make(np.where(mask, a.data, 0.0), (a,), bw)


def leaky_relu(a: Tensor, slope: float) -> Tensor:
    mask = a.data > 0

    def bw(out):
        a.accumulate_grad(out.grad * np.where(mask, 1.0, slope), fresh=True)

    return _make(np.where(mask, a.data, slope * a.data), (a,), bw)


def sigmoid(a: Tensor) -> Tensor:
    s = 1.0 / (1.0 + np.exp(-np.clip(a.data, -500.0, 500.0)))

    def bw(out):
        a.accumulate_grad(out.grad * s * (1.0 - s), fresh=True)

    return _make(s, (a,), bw)


def log(a: Tensor) -> Tensor:
    def bw(out):
        a.accumulate_grad(out.grad / a.data, fresh=True)

    return _make(np.log(a.data), (a,), bw)


def sqrt(a: Tensor) -> Tensor:
    """Elementwise square root with a zero subgradient at 0.

    The value is exact (sqrt(0) = 0); only the derivative is regularized so a
    penalty that happens to be identically zero does not inject NaNs.
    """
    r = np.sqrt(a.data)

    def bw(out):
        with np.errstate(divide="ignore"):
            d = np.where(r > 0, 0.5 / np.where(r > 0, r, 1.0), 0.0)
        a.accumulate_grad(out.grad * d, fresh=True)

    return _make(r, (a,), bw)


def clip(a: Tensor, lo: float, hi: float) -> Tensor:
    """Clamp values to [lo, hi]; gradient passes through strictly inside."""
    mask = (a.data > lo) & (a.data < hi)

    def bw(out):
        a.accumulate_grad(out.grad * mask, fresh=True)

    return _make(np.clip(a.data, lo, hi), (a,), bw)


def minimum(a: Tensor, cap: float) -> Tensor:
    """Elementwise min(a, cap); gradient flows only where a < cap."""
    if not np.isfinite(cap):
        return a
    mask = a.data < cap

    def bw(out):
        a.accumulate_grad(out.grad * mask, fresh=True)

    return _make(np.minimum(a.data, cap), (a,), bw)


def slice_rows(a: Tensor, lo: int, hi: int) -> Tensor:
    """Rows [lo, hi) as a tensor; gradient scatters back into place."""

    def bw(out):
        g = np.zeros_like(a.data)
        g[lo:hi] = out.grad
        a.accumulate_grad(g, fresh=True)

    return _make(a.data[lo:hi], (a,), bw)


def concat_cols(parts: list[Tensor]) -> Tensor:
    widths = [p.shape[1] for p in parts]
    offsets = np.cumsum([0] + widths)

    def bw(out):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                p.accumulate_grad(out.grad[:, lo:hi])

    return _make(np.concatenate([p.data for p in parts], axis=1), tuple(parts), bw)


def _freed_marker(_):
    raise RuntimeError("graph already freed; rebuild the loss before backward")


def backward(loss: Tensor, free_graph: bool = True) -> None:
    """Backpropagate from a scalar loss through the recorded graph.

    Gradients accumulate into ``.grad`` of every tensor reached from ``loss``
    that requires one; repeated calls on fresh graphs keep accumulating until
    the buffers are cleared.  The graph is released afterwards by default, so
    calling backward twice on the same node raises.
    """
    if loss.data.size != 1:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not np.isfinite(loss.data.reshape(())[()]):
        raise FloatingPointError("non-finite loss; aborting backward")
    if loss._backward is _freed_marker:
        raise RuntimeError("graph already freed; rebuild the loss before backward")
    if loss._backward is None and not loss._parents:
        if loss.requires_grad:
            loss.accumulate_grad(np.ones_like(loss.data))
            return
        raise RuntimeError("loss has no recorded graph (detached or constant)")

    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))

    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backward is not None:
            node._backward(node)
    if free_graph:
        for node in topo:
            if node._parents:
                node._parents = ()
                node._backward = _freed_marker
