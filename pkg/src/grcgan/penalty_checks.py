"""Finite-difference verification of the penalty parameter-gradients.

Both condition penalties are differentiated with respect to the generator
parameters through their extra forward passes; these checks confirm the
resulting gradients against central differences on tiny networks.
"""

from __future__ import annotations

import math

import numpy as np

from .gan.config import ConditionEncoding, SphereSurface
from .gan.penalties import (
    condition_jacobian_penalty,
    condition_ratio_penalty,
)
from .gan.samplers import sample_perturbation
from .gradcheck import CheckResult, max_rel_error, numeric_grad
from .nn import LayerSpec, MlpSpec, Network
from .tensor import backward


def _tiny_generator(rng: np.random.Generator, cond_dim: int, noise_dim: int,
                    batch_norm: bool = False) -> Network:
    spec = MlpSpec(
        input_dim=noise_dim + (2 if cond_dim == 0 else cond_dim),
        hidden=(
            LayerSpec(6, "relu", batch_norm=batch_norm),
            LayerSpec(6, "leaky_relu", slope=0.1),
        ),
        output_dim=2,
    )
    return Network(spec, rng)


def _check_penalty(name: str, net: Network, penalty_fn, tolerance: float) -> list[CheckResult]:
    net.zero_grad()
    backward(penalty_fn())
    results = []
    for i, p in enumerate(net.parameters()):
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        numeric = numeric_grad(lambda: penalty_fn().item(), p.data, h=1e-5)
        results.append(
            CheckResult(f"{name}.param{i}", max_rel_error(analytic, numeric), tolerance)
        )
    return results


def penalty_check_suite(seed: int = 0, tolerance: float = 1e-3) -> list[CheckResult]:
    """Parameter-gradient checks for both penalty forms, raw and angle encodings."""
    rng = np.random.default_rng(seed)
    results: list[CheckResult] = []

    # Jacobian penalty, raw 3-dim conditions.
    net = _tiny_generator(rng, cond_dim=3, noise_dim=2)
    enc = ConditionEncoding("raw")
    x = rng.standard_normal((5, 3))
    z = rng.standard_normal((5, 2))
    results += _check_penalty(
        "jacobian_raw",
        net,
        lambda: condition_jacobian_penalty(net, enc, x, z, h=1e-3),
        tolerance,
    )

    # Jacobian penalty through the angle encoding (perturb angle, re-encode).
    net_sc = _tiny_generator(rng, cond_dim=0, noise_dim=2)
    enc_sc = ConditionEncoding("sincos")
    ang = rng.uniform(0.0, 2.0 * math.pi, (5, 1))
    z2 = rng.standard_normal((5, 2))
    results += _check_penalty(
        "jacobian_angle",
        net_sc,
        lambda: condition_jacobian_penalty(net_sc, enc_sc, ang, z2, h=1e-3),
        tolerance,
    )

    # Ratio penalty with sphere perturbations, finite and infinite caps.
    net_r = _tiny_generator(rng, cond_dim=3, noise_dim=2)
    dx = sample_perturbation(3, SphereSurface(0.1), 0.0, rng, n=5)
    for tag, tau1 in (("ratio_capped", 0.5), ("ratio_uncapped", math.inf)):
        results += _check_penalty(
            tag,
            net_r,
            lambda tau=tau1: condition_ratio_penalty(net_r, enc, x, z, dx, tau),
            tolerance,
        )
    return results
