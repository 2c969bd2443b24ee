"""Synthetic benchmark datasets and their exact conditional laws.

Two families: 2-D Gaussians whose means sit on a circle, indexed by a scalar
angle (with an optional gapped variant for extrapolation tests), and a joint
multivariate Gaussian split into condition and output coordinates, for which
the true conditional distribution is available in closed form.

Generation is a pure function of (spec, seed): the same inputs always yield
the same arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GaussianSpec:
    """A Gaussian by mean vector and covariance matrix."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64).reshape(-1))
        cov = np.asarray(self.cov, dtype=np.float64)
        if cov.shape != (self.mean.size, self.mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean dim {self.mean.size}")
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def validate_psd(self, tol: float = 1e-10) -> None:
        if not np.allclose(self.cov, self.cov.T, atol=tol):
            raise ValueError("covariance is not symmetric")
        eigvals = np.linalg.eigvalsh(0.5 * (self.cov + self.cov.T))
        if eigvals.min() < -tol:
            raise ValueError(f"covariance has eigenvalue {eigvals.min()} < -{tol}")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n draws; Cholesky with an eigendecomposition fallback for PSD cov."""
        try:
            chol = np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError:
            w, v = np.linalg.eigh(0.5 * (self.cov + self.cov.T))
            chol = v * np.sqrt(np.clip(w, 0.0, None))
        z = rng.standard_normal((n, self.dim))
        return self.mean + z @ chol.T


@dataclass(frozen=True)
class LabeledDataset:
    """Aligned (condition, output) rows plus how to regenerate them."""

    conditions: np.ndarray
    outputs: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.conditions, dtype=np.float64)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        o = np.asarray(self.outputs, dtype=np.float64)
        if c.shape[0] != o.shape[0]:
            raise ValueError("conditions and outputs must have equal row counts")
        object.__setattr__(self, "conditions", c)
        object.__setattr__(self, "outputs", o)

    def __len__(self) -> int:
        return self.conditions.shape[0]


# ---------------------------------------------------------------------------
# Circular 2-D Gaussians


@dataclass(frozen=True)
class CircularSpec:
    """Gaussians of scale sigma_tilde centered at (R sin x, R cos x).

    ``gaps`` lists closed angle intervals that contain no training labels;
    empty means the full circle.
    """

    radius: float = 1.0
    sigma_tilde: float = 0.2
    n_labels: int = 120
    samples_per_label: int = 10
    gaps: tuple[tuple[float, float], ...] = ()

    def validate(self) -> None:
        if self.radius <= 0 or self.sigma_tilde < 0:
            raise ValueError("radius must be positive, sigma_tilde nonnegative")
        if self.n_labels < 1 or self.samples_per_label < 1:
            raise ValueError("need at least one label and one sample per label")
        total_gap = 0.0
        for lo, hi in self.gaps:
            if not (0.0 <= lo < hi <= TWO_PI):
                raise ValueError(f"gap ({lo}, {hi}) not inside [0, 2pi)")
            total_gap += hi - lo
        for i, (lo1, hi1) in enumerate(self.gaps):
            for lo2, hi2 in self.gaps[i + 1 :]:
                if lo1 < hi2 and lo2 < hi1:
                    raise ValueError("gaps overlap")
        if total_gap >= TWO_PI:
            raise ValueError("gaps cover the whole circle")

    @property
    def hq_threshold(self) -> float:
        """Radius of the circle holding ~90% of each Gaussian's mass."""
        return 2.15 * self.sigma_tilde

    def mean_at(self, angle: np.ndarray | float) -> np.ndarray:
        a = np.asarray(angle, dtype=np.float64)
        return np.stack(
            [self.radius * np.sin(a), self.radius * np.cos(a)], axis=-1
        )

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "sigma_tilde": self.sigma_tilde,
            "n_labels": self.n_labels,
            "samples_per_label": self.samples_per_label,
            "gaps": [list(g) for g in self.gaps],
        }

    @staticmethod
    def from_dict(d: dict) -> "CircularSpec":
        return CircularSpec(
            radius=d["radius"],
            sigma_tilde=d["sigma_tilde"],
            n_labels=d["n_labels"],
            samples_per_label=d["samples_per_label"],
            gaps=tuple(tuple(g) for g in d["gaps"]),
        )


def default_gaps(width: float = math.pi / 12.0) -> tuple[tuple[float, float], ...]:
    """Three equal gaps centered at pi/3, pi, 5pi/3."""
    centers = (math.pi / 3.0, math.pi, 5.0 * math.pi / 3.0)
    return tuple((c - width / 2.0, c + width / 2.0) for c in centers)


def circular_labels(spec: CircularSpec) -> tuple[np.ndarray, np.ndarray]:
    """Train labels on the circle (or its gap complement) plus test labels.

    Full circle: n_labels angles equally spaced over [0, 2pi), no test
    labels.  With gaps: labels are spread evenly over the complement arcs by
    arc length at half-step offsets, and each gap midpoint becomes a test
    label.
    """
    spec.validate()
    n = spec.n_labels
    if not spec.gaps:
        return TWO_PI * np.arange(n) / n, np.array([])

    gaps = sorted(spec.gaps)
    arcs: list[tuple[float, float]] = []
    cursor = 0.0
    for lo, hi in gaps:
        if lo > cursor:
            arcs.append((cursor, lo))
        cursor = hi
    if cursor < TWO_PI:
        # Wrap: the arc past the last gap joins the one before the first.
        if arcs and arcs[0][0] == 0.0:
            first = arcs.pop(0)
            arcs.append((cursor, TWO_PI + first[1]))
        else:
            arcs.append((cursor, TWO_PI))

    total = sum(hi - lo for lo, hi in arcs)
    positions = total * (np.arange(n) + 0.5) / n
    labels = np.empty(n)
    arc_starts = np.cumsum([0.0] + [hi - lo for lo, hi in arcs])
    for i, s in enumerate(positions):
        j = int(np.searchsorted(arc_starts, s, side="right") - 1)
        j = min(j, len(arcs) - 1)
        labels[i] = (arcs[j][0] + (s - arc_starts[j])) % TWO_PI
    labels.sort()

    test = np.array([0.5 * (lo + hi) for lo, hi in gaps])
    for lo, hi in gaps:
        inside = (labels > lo) & (labels < hi)
        if inside.any():
            raise AssertionError("train label placed inside a gap")
    return labels, test


def sample_circular(
    spec: CircularSpec, labels: np.ndarray, rng: np.random.Generator
) -> LabeledDataset:
    """samples_per_label draws of N(mean_at(x), sigma_tilde^2 I) per label."""
    spec.validate()
    labels = np.asarray(labels, dtype=np.float64).reshape(-1)
    reps = spec.samples_per_label
    conditions = np.repeat(labels, reps).reshape(-1, 1)
    centers = spec.mean_at(conditions[:, 0])
    noise = rng.standard_normal((conditions.shape[0], 2))
    outputs = centers + spec.sigma_tilde * noise
    return LabeledDataset(conditions, outputs, {"family": "circular", "spec": spec.to_dict()})


# ---------------------------------------------------------------------------
# Conditional multivariate Gaussian


@dataclass(frozen=True)
class MvnSpec:
    """Joint Gaussian over k dims; first p are the condition, the rest the output."""

    k: int
    p: int
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=np.float64))
        if not 1 <= self.p < self.k:
            raise ValueError(f"need 1 <= p < k, got p={self.p}, k={self.k}")
        if self.mu.shape != (self.k,) or self.sigma.shape != (self.k, self.k):
            raise ValueError("mu must be k-vector and sigma k x k")

    @property
    def out_dim(self) -> int:
        return self.k - self.p

    def joint(self) -> GaussianSpec:
        return GaussianSpec(self.mu, self.sigma)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "p": self.p,
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "MvnSpec":
        return MvnSpec(k=d["k"], p=d["p"], mu=np.array(d["mu"]), sigma=np.array(d["sigma"]))


def make_mvn_params(k: int, seed: int, p: int | None = None) -> MvnSpec:
    """Random joint-Gaussian parameters.

    Means are i.i.d. U[10, 15].  The covariance is a Gram matrix A A^T with
    A uniform on [-1, 1], rescaled so the largest absolute entry is 0.25,
    then symmetrized; eigenvalues below -1e-12 are an error, tiny negatives
    are clamped to zero.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    mu = rng.uniform(10.0, 15.0, k)
    a = rng.uniform(-1.0, 1.0, (k, k))
    sigma = a @ a.T
    sigma *= 0.25 / np.abs(sigma).max()
    sigma = 0.5 * (sigma + sigma.T)
    w, v = np.linalg.eigh(sigma)
    if w.min() < -1e-12:
        raise ValueError(f"covariance construction went indefinite: min eig {w.min()}")
    if w.min() < 0.0:
        sigma = (v * np.clip(w, 0.0, None)) @ v.T
        sigma = 0.5 * (sigma + sigma.T)
    return MvnSpec(k=k, p=p if p is not None else k - 2, mu=mu, sigma=sigma)


def sample_mvn(spec: MvnSpec, n: int, rng: np.random.Generator) -> LabeledDataset:
    """n joint draws split into (first p, last k-p) columns."""
    x = spec.joint().sample(n, rng)
    return LabeledDataset(
        x[:, : spec.p],
        x[:, spec.p :],
        {"family": "mvn", "spec": spec.to_dict(), "n": n},
    )


def true_conditional(spec: MvnSpec, x: np.ndarray) -> GaussianSpec:
    """The exact conditional law of the output block given condition x.

    mean = mu_y + S_yx S_xx^-1 (x - mu_x);  cov = S_yy - S_yx S_xx^-1 S_xy.
    A singular condition block gets a 1e-10 ridge before giving up.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    p = spec.p
    if x.size != p:
        raise ValueError(f"condition must have {p} entries, got {x.size}")
    s_xx = spec.sigma[:p, :p]
    s_xy = spec.sigma[:p, p:]
    s_yx = spec.sigma[p:, :p]
    s_yy = spec.sigma[p:, p:]
    try:
        solve_x = np.linalg.solve(s_xx, np.column_stack([x - spec.mu[:p], s_xy]))
    except np.linalg.LinAlgError:
        solve_x = np.linalg.solve(
            s_xx + 1e-10 * np.eye(p), np.column_stack([x - spec.mu[:p], s_xy])
        )
    mean = spec.mu[p:] + s_yx @ solve_x[:, 0]
    cov = s_yy - s_yx @ solve_x[:, 1:]
    cov = 0.5 * (cov + cov.T)
    return GaussianSpec(mean, cov)
