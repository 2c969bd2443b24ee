"""Finite-difference verification of analytic gradients.

Central differences with step h on every parameter entry are the independent
oracle used by the test suite and the ``gradcheck`` command.  The checks
cover each layer kind and both generator penalties on small random networks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .nn import LayerSpec, MlpSpec, Network
from .tensor import Tensor, backward


def numeric_grad(fn, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar-valued fn over every entry of x."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + h
        fp = fn()
        x[idx] = orig - h
        fm = fn()
        x[idx] = orig
        g[idx] = (fp - fm) / (2 * h)
        it.iternext()
    return g


def max_rel_error(analytic: np.ndarray, numeric: np.ndarray, atol: float = 1e-7) -> float:
    """max |a - n| / (|a| + |n|) over entries that are not jointly ~zero.

    Entries where |a| + |n| <= atol are treated as matching: central
    differences carry O(1e-11) roundoff noise, which would otherwise swamp
    the ratio for gradients that are exactly zero (for example a bias feeding
    a train-mode batch norm, whose shift the batch mean removes).
    """
    mag = np.abs(analytic) + np.abs(numeric)
    err = np.abs(analytic - numeric)
    rel = np.where(mag > atol, err / np.maximum(mag, atol), 0.0)
    return float(np.max(rel)) if rel.size else 0.0


@dataclass
class CheckResult:
    name: str
    rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.rel_error < self.tolerance


def check_network_gradients(
    net: Network,
    x: np.ndarray,
    train: bool = True,
    h: float = 1e-5,
    tolerance: float = 1e-4,
    name: str = "net",
    check_input: bool = True,
) -> list[CheckResult]:
    """Compare analytic grads of mean(net(x)^2) against central differences.

    Checks every parameter tensor and, optionally, the input gradient.
    """
    xt = Tensor(x.copy(), requires_grad=check_input)

    def loss_tensor() -> Tensor:
        out = net.forward(xt, train=train)
        return T.mean_all(T.mul(out, out))

    def loss_value() -> float:
        return loss_tensor().item()

    net.zero_grad()
    xt.zero_grad()
    backward(loss_tensor())

    results = []
    for i, p in enumerate(net.parameters()):
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        numeric = numeric_grad(loss_value, p.data, h=h)
        results.append(CheckResult(f"{name}.param{i}", max_rel_error(analytic, numeric), tolerance))
    if check_input:
        analytic = xt.grad if xt.grad is not None else np.zeros_like(xt.data)
        numeric = numeric_grad(loss_value, xt.data, h=h)
        results.append(CheckResult(f"{name}.input", max_rel_error(analytic, numeric), tolerance))
    return results


def layer_check_suite(seed: int = 0) -> list[CheckResult]:
    """Gradient checks for each layer kind on small random nets."""
    rng = np.random.default_rng(seed)
    cases = {
        "dense": MlpSpec(3, (LayerSpec(5, "identity"),), 2),
        "relu": MlpSpec(3, (LayerSpec(5, "relu"),), 2),
        "leaky_relu": MlpSpec(3, (LayerSpec(5, "leaky_relu", slope=0.1),), 2),
        "sigmoid": MlpSpec(3, (LayerSpec(5, "sigmoid"),), 2, "sigmoid"),
        "bn_train": MlpSpec(3, (LayerSpec(5, "relu", batch_norm=True),), 2),
        "bn_eval": MlpSpec(3, (LayerSpec(5, "relu", batch_norm=True),), 2),
        "deep_mixed": MlpSpec(
            4,
            (
                LayerSpec(6, "relu", batch_norm=True),
                LayerSpec(6, "leaky_relu", slope=0.2),
                LayerSpec(6, "sigmoid"),
            ),
            3,
        ),
    }
    results = []
    for cname, spec in cases.items():
        net = Network(spec, rng)
        x = rng.standard_normal((7, spec.input_dim))
        # Shift inputs away from ReLU kinks so finite differences stay clean.
        x += 0.05 * np.sign(x)
        results.extend(
            check_network_gradients(net, x, train=(cname != "bn_eval"), name=cname)
        )
    return results
