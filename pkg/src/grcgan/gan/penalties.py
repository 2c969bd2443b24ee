"""Lipschitz penalties on the generator's condition input.

Both penalties are built from extra forward passes only, so gradients with
respect to the generator parameters come out of the ordinary reverse pass;
no second-order differentiation happens anywhere.

``g_of_x`` below is a callable mapping a raw condition batch (m, p) to a
generator output :class:`~grcgan.tensor.Tensor` of shape (m, q) with the
noise batch and condition encoding already baked in.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .. import tensor as T
from ..nn import Network
from ..tensor import Tensor
from .config import ConditionEncoding

GForward = Callable[[np.ndarray], Tensor]


def row_l2(t: Tensor) -> Tensor:
    """Euclidean norm of each row, shape (m, 1)."""
    return T.sqrt(T.sum_rows(T.mul(t, t)))


def fd_jacobian_penalty(g_of_x: GForward, x_raw: np.ndarray, h: float) -> Tensor:
    """Mean Frobenius norm of the condition Jacobian, by central differences.

    Column j of the estimated Jacobian is (G(x + h e_j) - G(x - h e_j)) / 2h.
    Central differences are exact on maps linear in x, so the penalty of a
    linear generator equals its true Frobenius norm for any h.
    """
    if h <= 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    x_raw = np.asarray(x_raw, dtype=np.float64)
    if x_raw.ndim == 1:
        x_raw = x_raw.reshape(-1, 1)
    sq_sum: Tensor | None = None
    for j in range(x_raw.shape[1]):
        xp = x_raw.copy()
        xp[:, j] += h
        xm = x_raw.copy()
        xm[:, j] -= h
        col = T.scale(T.sub(g_of_x(xp), g_of_x(xm)), 1.0 / (2.0 * h))
        contrib = T.sum_rows(T.mul(col, col))
        sq_sum = contrib if sq_sum is None else T.add(sq_sum, contrib)
    return T.mean_all(T.sqrt(sq_sum))


def ratio_penalty(
    g_of_x: GForward,
    x_raw: np.ndarray,
    dx: np.ndarray,
    tau1: float,
    tau2: float = 0.0,
) -> Tensor:
    """Mean of min(||G(x+dx) - G(x)|| / ||dx||, tau1) over the batch."""
    x_raw = np.asarray(x_raw, dtype=np.float64)
    if x_raw.ndim == 1:
        x_raw = x_raw.reshape(-1, 1)
    dx = np.asarray(dx, dtype=np.float64)
    if dx.shape != x_raw.shape:
        raise ValueError(f"perturbations {dx.shape} do not match conditions {x_raw.shape}")
    norms = np.linalg.norm(dx, axis=1, keepdims=True)
    floor = max(tau2, 1e-300)
    if (norms < floor).any():
        raise ValueError("perturbation norm below the tau2 floor; upstream sampler failed")
    diff = T.sub(g_of_x(x_raw + dx), g_of_x(x_raw))
    f = T.mul(row_l2(diff), Tensor(1.0 / norms))
    return T.mean_all(T.minimum(f, tau1))


def generator_condition_map(
    net: Network,
    encoding: ConditionEncoding,
    z: np.ndarray,
    train: bool = True,
) -> GForward:
    """Close over noise and encoding: raw conditions -> generator output.

    Penalty probes keep train-mode batch normalization but do not feed the
    running-stat buffers: their perturbed/interpolated inputs are not the
    operational distribution the eval-mode network should reflect.
    """
    z = np.asarray(z, dtype=np.float64)

    def g_of_x(x_raw: np.ndarray) -> Tensor:
        enc = encoding.encode(x_raw)
        if enc.shape[0] != z.shape[0]:
            raise ValueError("condition batch and noise batch sizes differ")
        return net.forward(np.concatenate([z, enc], axis=1), train=train, update_stats=False)

    return g_of_x


def _fused_pair_map(
    net: Network, encoding: ConditionEncoding, z: np.ndarray, train: bool
):
    """Evaluate the generator at two condition batches in one forward pass.

    Row-independent layers make the stacked pass exactly equivalent to two
    separate ones while halving the per-call overhead; batch norm couples
    rows through its batch statistics, so networks carrying it fall back to
    the two-pass map.
    """
    z = np.asarray(z, dtype=np.float64)

    def g_pair(xa: np.ndarray, xb: np.ndarray) -> tuple[Tensor, Tensor]:
        inp = np.concatenate(
            [
                np.concatenate([z, encoding.encode(xa)], axis=1),
                np.concatenate([z, encoding.encode(xb)], axis=1),
            ],
            axis=0,
        )
        out = net.forward(inp, train=train, update_stats=False)
        m = z.shape[0]
        return T.slice_rows(out, 0, m), T.slice_rows(out, m, 2 * m)

    return g_pair


def condition_jacobian_penalty(
    net: Network,
    encoding: ConditionEncoding,
    x_raw: np.ndarray,
    z: np.ndarray,
    h: float,
    train: bool = True,
) -> Tensor:
    if h <= 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    if net.has_batch_norm:
        return fd_jacobian_penalty(
            generator_condition_map(net, encoding, z, train), x_raw, h
        )
    x_raw = np.asarray(x_raw, dtype=np.float64)
    if x_raw.ndim == 1:
        x_raw = x_raw.reshape(-1, 1)
    g_pair = _fused_pair_map(net, encoding, z, train)
    sq_sum: Tensor | None = None
    for j in range(x_raw.shape[1]):
        xp = x_raw.copy()
        xp[:, j] += h
        xm = x_raw.copy()
        xm[:, j] -= h
        up, down = g_pair(xp, xm)
        col = T.scale(T.sub(up, down), 1.0 / (2.0 * h))
        contrib = T.sum_rows(T.mul(col, col))
        sq_sum = contrib if sq_sum is None else T.add(sq_sum, contrib)
    return T.mean_all(T.sqrt(sq_sum))


def condition_ratio_penalty(
    net: Network,
    encoding: ConditionEncoding,
    x_raw: np.ndarray,
    z: np.ndarray,
    dx: np.ndarray,
    tau1: float,
    tau2: float = 0.0,
    train: bool = True,
) -> Tensor:
    if net.has_batch_norm:
        return ratio_penalty(
            generator_condition_map(net, encoding, z, train), x_raw, dx, tau1, tau2
        )
    x_raw = np.asarray(x_raw, dtype=np.float64)
    if x_raw.ndim == 1:
        x_raw = x_raw.reshape(-1, 1)
    dx = np.asarray(dx, dtype=np.float64)
    if dx.shape != x_raw.shape:
        raise ValueError(f"perturbations {dx.shape} do not match conditions {x_raw.shape}")
    norms = np.linalg.norm(dx, axis=1, keepdims=True)
    if (norms < max(tau2, 1e-300)).any():
        raise ValueError("perturbation norm below the tau2 floor; upstream sampler failed")
    pert, base = _fused_pair_map(net, encoding, z, train)(x_raw + dx, x_raw)
    f = T.mul(row_l2(T.sub(pert, base)), Tensor(1.0 / norms))
    return T.mean_all(T.minimum(f, tau1))
