"""Condition interpolation and perturbation draws for the penalty terms."""

from __future__ import annotations

import numpy as np

from .config import GaussianIso, SphereSurface

MAX_RESAMPLE_ATTEMPTS = 100


def interpolate_conditions(x1: np.ndarray, x2: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """eps * x1 + (1 - eps) * x2 with one weight per pair."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != x2.shape:
        raise ValueError(f"condition batches differ: {x1.shape} vs {x2.shape}")
    eps = np.asarray(eps, dtype=np.float64).reshape(-1, 1)
    if eps.shape[0] != x1.shape[0]:
        raise ValueError("one interpolation weight per pair required")
    return eps * x1 + (1.0 - eps) * x2


def sample_interpolated_conditions(
    x1: np.ndarray, x2: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Points drawn uniformly on the segments between paired conditions."""
    x1 = np.asarray(x1, dtype=np.float64)
    eps = rng.uniform(size=(x1.shape[0], 1))
    return interpolate_conditions(x1, x2, eps)


def sample_perturbation(
    dim: int,
    law: SphereSurface | GaussianIso,
    tau2: float,
    rng: np.random.Generator,
    n: int = 1,
) -> np.ndarray:
    """Draw n perturbation vectors with norm >= tau2, shape (n, dim).

    Sphere draws have norm exactly equal to the radius with direction uniform
    on the sphere.  Gaussian draws below the tau2 floor are redrawn; after
    MAX_RESAMPLE_ATTEMPTS rounds of failures this raises.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if isinstance(law, SphereSurface):
        if law.radius < tau2:
            raise ValueError("sphere radius below the tau2 floor")
        g = rng.standard_normal((n, dim))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        for _ in range(MAX_RESAMPLE_ATTEMPTS):
            bad = (norms == 0).ravel()
            if not bad.any():
                break
            g[bad] = rng.standard_normal((int(bad.sum()), dim))
            norms = np.linalg.norm(g, axis=1, keepdims=True)
        else:
            raise RuntimeError("could not draw a nonzero direction")
        return law.radius * g / norms
    if isinstance(law, GaussianIso):
        dx = law.sigma * rng.standard_normal((n, dim))
        for _ in range(MAX_RESAMPLE_ATTEMPTS):
            bad = np.linalg.norm(dx, axis=1) < tau2
            if not bad.any():
                return dx
            dx[bad] = law.sigma * rng.standard_normal((int(bad.sum()), dim))
        raise RuntimeError(
            f"perturbation norms stayed below tau2={tau2} after "
            f"{MAX_RESAMPLE_ATTEMPTS} resample rounds"
        )
    raise TypeError(f"unknown perturbation law {law!r}")
