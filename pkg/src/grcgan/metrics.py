"""Evaluation machinery: Gaussian fits, 2-Wasserstein distance, sample
quality and mode-recovery rates, and the empirical conditional-Lipschitz
audit of a trained generator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .datasets import CircularSpec, GaussianSpec, MvnSpec, true_conditional
from .gan.config import ConditionEncoding
from .gan.train import generate
from .nn import Network


def gaussian_fit(samples: np.ndarray) -> GaussianSpec:
    """Sample mean and unbiased covariance (divisor n-1), symmetrized.

    Two samples are enough for the divisor; the fit is singular below d+1
    samples, which downstream consumers (matrix sqrt, W2) handle as PSD.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValueError("samples must be a 2-D array (n, d)")
    n, d = samples.shape
    if n < 2:
        raise ValueError(f"need at least 2 samples to fit a covariance, got {n}")
    mean = samples.mean(axis=0)
    centered = samples - mean
    cov = centered.T @ centered / (n - 1)
    return GaussianSpec(mean, 0.5 * (cov + cov.T))


def matrix_sqrt_psd(m: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in [-tol, 0) are clamped to zero; anything lower, or an
    asymmetric input, is an error.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"need a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, atol=1e-8):
        raise ValueError("matrix is not symmetric")
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    if w.min() < -tol:
        raise ValueError(f"matrix is indefinite: eigenvalue {w.min()}")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return 0.5 * (root + root.T)


def w2_gaussians(g1: GaussianSpec, g2: GaussianSpec) -> float:
    """Closed-form 2-Wasserstein distance between two Gaussians.

    W2^2 = ||mu1 - mu2||^2 + tr(S1 + S2 - 2 (S2^{1/2} S1 S2^{1/2})^{1/2});
    the total is clamped at zero before the square root to absorb roundoff.
    """
    if g1.dim != g2.dim:
        raise ValueError(f"dimension mismatch: {g1.dim} vs {g2.dim}")
    mean_term = float(np.sum((g1.mean - g2.mean) ** 2))
    root2 = matrix_sqrt_psd(g2.cov)
    cross = matrix_sqrt_psd(0.5 * ((root2 @ g1.cov @ root2) + (root2 @ g1.cov @ root2).T))
    trace_term = float(np.trace(g1.cov) + np.trace(g2.cov) - 2.0 * np.trace(cross))
    return float(np.sqrt(max(mean_term + trace_term, 0.0)))


def empirical_w2(xs: np.ndarray, ys: np.ndarray) -> float:
    """Exact-assignment estimate of W2 between two equal-size sample clouds.

    Solves the matching that minimizes mean squared distance and returns its
    square root.  Used as an independent cross-check of the closed form.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape:
        raise ValueError("clouds must have equal shapes")
    cost = cdist(xs, ys, metric="sqeuclidean")
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].mean()))


def high_quality_fraction(samples: np.ndarray, center: np.ndarray, threshold: float) -> float:
    """Fraction of samples strictly closer to the center than the threshold."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[0] == 0:
        raise ValueError("empty sample set")
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    dists = np.linalg.norm(samples - np.asarray(center, dtype=np.float64), axis=1)
    return float(np.mean(dists < threshold))


def recovered_modes(per_label_hq_counts) -> float:
    """Fraction of labels with at least one high-quality sample."""
    counts = np.asarray(list(per_label_hq_counts))
    if counts.size == 0:
        return 0.0
    return float(np.mean(counts >= 1))


# ---------------------------------------------------------------------------
# Conditional-Lipschitz audit


@dataclass(frozen=True)
class LipschitzAudit:
    """Empirical check that fitted conditional distance respects K * ||dx||.

    ``k_hat`` is the largest per-noise output ratio over shared noise draws;
    ``w2_fitted`` compares Gaussians fitted to the two generated clouds;
    ``bound_slack`` = k_hat * ||x1 - x2|| - w2_fitted should be nonnegative
    up to Monte Carlo error.
    """

    x1: np.ndarray
    x2: np.ndarray
    k_hat: float
    w2_fitted: float
    bound_slack: float
    w2_stderr: float


def lipschitz_audit(
    sample_fn,
    x1: np.ndarray,
    x2: np.ndarray,
    n_z: int,
    rng: np.random.Generator,
    n_boot: int = 64,
) -> LipschitzAudit:
    """Audit a conditional sampler at a pair of conditions.

    ``sample_fn(x1, x2, n_z, rng)`` must return (out1, out2, z) where both
    output clouds of shape (n_z, q) are produced from the same noise draws z.
    The standard error of the fitted distance comes from a bootstrap over the
    shared noise index set.
    """
    x1 = np.asarray(x1, dtype=np.float64).reshape(-1)
    x2 = np.asarray(x2, dtype=np.float64).reshape(-1)
    dist = float(np.linalg.norm(x1 - x2))
    if dist == 0.0:
        raise ValueError("conditions must differ")
    if n_z < 50:
        raise ValueError(f"need at least 50 noise draws, got {n_z}")
    out1, out2, z = sample_fn(x1, x2, n_z, rng)
    ratios = np.linalg.norm(out1 - out2, axis=1) / dist
    k_hat = float(ratios.max())
    w2 = w2_gaussians(gaussian_fit(out1), gaussian_fit(out2))
    boots = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n_z, n_z)
        boots[b] = w2_gaussians(gaussian_fit(out1[idx]), gaussian_fit(out2[idx]))
    return LipschitzAudit(
        x1=x1,
        x2=x2,
        k_hat=k_hat,
        w2_fitted=w2,
        bound_slack=k_hat * dist - w2,
        w2_stderr=float(boots.std(ddof=1)),
    )


def network_pair_sampler(net: Network, encoding: ConditionEncoding, noise_dim: int):
    """Adapter giving :func:`lipschitz_audit` shared-noise generator samples."""

    def sample_fn(x1, x2, n_z, rng):
        z = rng.standard_normal((n_z, noise_dim))
        def run(x):
            enc = np.repeat(encoding.encode(np.asarray(x).reshape(1, -1)), n_z, axis=0)
            return net.forward(np.concatenate([z, enc], axis=1), train=False).data
        return run(x1), run(x2), z

    return sample_fn


# ---------------------------------------------------------------------------
# Experiment-level evaluation


@dataclass
class LabelRow:
    label: float
    hq_frac: float
    recovered: bool
    w2: float


@dataclass
class ExperimentReport:
    rows: list[LabelRow] = field(default_factory=list)
    repetitions: int = 1

    @property
    def pct_high_quality(self) -> float:
        return 100.0 * float(np.mean([r.hq_frac for r in self.rows]))

    @property
    def pct_recovered(self) -> float:
        return 100.0 * float(np.mean([1.0 if r.recovered else 0.0 for r in self.rows]))

    @property
    def mean_w2(self) -> float:
        return float(np.mean([r.w2 for r in self.rows]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("label,hq_frac,recovered,w2\n")
            for r in self.rows:
                fh.write(f"{r.label!r},{r.hq_frac!r},{int(r.recovered)},{r.w2!r}\n")
            fh.write(
                f"summary,{self.pct_high_quality / 100.0!r},"
                f"{self.pct_recovered / 100.0!r},{self.mean_w2!r}\n"
            )


def evaluate_circular(
    net: Network,
    encoding: ConditionEncoding,
    eval_labels: np.ndarray,
    spec: CircularSpec,
    rng: np.random.Generator,
    n_per_label: int = 100,
    noise_dim: int = 2,
) -> ExperimentReport:
    """Per-label quality, recovery, and fitted-vs-true W2 for a trained generator.

    For each label the generator produces ``n_per_label`` samples in eval
    mode; quality counts distances below 2.15 sigma_tilde to the true center,
    and W2 compares a Gaussian fit of the samples with the true conditional.
    """
    report = ExperimentReport()
    for label in np.asarray(eval_labels, dtype=np.float64).reshape(-1):
        samples = generate(net, np.array([label]), n_per_label, encoding, rng, noise_dim)
        center = spec.mean_at(float(label))
        hq = high_quality_fraction(samples, center, spec.hq_threshold)
        truth = GaussianSpec(center, spec.sigma_tilde**2 * np.eye(2))
        w2 = w2_gaussians(gaussian_fit(samples), truth)
        report.rows.append(LabelRow(float(label), hq, hq > 0.0, w2))
    return report


@dataclass
class MvnLabelRow:
    index: int
    w2_fitted: float
    w2_exact: float


@dataclass
class MvnReport:
    rows: list[MvnLabelRow] = field(default_factory=list)

    @property
    def mean_w2(self) -> float:
        return float(np.mean([r.w2_fitted for r in self.rows]))

    @property
    def mean_w2_exact(self) -> float:
        return float(np.mean([r.w2_exact for r in self.rows]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("label_index,w2_fitted,w2_exact\n")
            for r in self.rows:
                fh.write(f"{r.index},{r.w2_fitted!r},{r.w2_exact!r}\n")
            fh.write(f"summary,{self.mean_w2!r},{self.mean_w2_exact!r}\n")


def evaluate_mvn(
    net: Network,
    spec: MvnSpec,
    rng: np.random.Generator,
    n_labels: int = 100,
    n_per_label: int = 250,
    encoding: ConditionEncoding | None = None,
) -> MvnReport:
    """Mean fitted-vs-fitted W2 over labels drawn from the condition marginal.

    Each label compares a Gaussian fit of generator samples against a fit of
    the same number of true conditional draws; the distance to the exact
    conditional is reported alongside as a diagnostic.
    """
    encoding = encoding or ConditionEncoding("raw")
    marginal = GaussianSpec(spec.mu[: spec.p], spec.sigma[: spec.p, : spec.p])
    labels = marginal.sample(n_labels, rng)
    report = MvnReport()
    for i in range(n_labels):
        x = labels[i]
        fakes = generate(net, x, n_per_label, encoding, rng, spec.out_dim)
        truth = true_conditional(spec, x)
        true_draws = truth.sample(n_per_label, rng)
        fit_fake = gaussian_fit(fakes)
        report.rows.append(
            MvnLabelRow(
                i,
                w2_gaussians(fit_fake, gaussian_fit(true_draws)),
                w2_gaussians(fit_fake, truth),
            )
        )
    return report
