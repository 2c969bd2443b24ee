import math

import numpy as np
import pytest

from grcgan.datasets import GaussianSpec
from grcgan.metrics import (
    empirical_w2,
    gaussian_fit,
    high_quality_fraction,
    matrix_sqrt_psd,
    recovered_modes,
    w2_gaussians,
)


def random_gaussian(rng, dim=2, mean_scale=2.0):
    a = rng.standard_normal((dim, dim))
    cov = a @ a.T + 0.3 * np.eye(dim)
    return GaussianSpec(mean_scale * rng.standard_normal(dim), cov)


class TestGaussianFit:
    def test_identical_samples(self):
        s = np.tile([1.0, -2.0], (10, 1))
        fit = gaussian_fit(s)
        np.testing.assert_allclose(fit.mean, [1.0, -2.0])
        np.testing.assert_allclose(fit.cov, np.zeros((2, 2)))

    def test_two_point_hand_computation(self):
        fit = gaussian_fit(np.array([[0.0, 0.0], [2.0, 0.0]]))
        np.testing.assert_allclose(fit.mean, [1.0, 0.0])
        np.testing.assert_allclose(fit.cov, [[2.0, 0.0], [0.0, 0.0]])

    def test_monte_carlo_covariance(self):
        rng = np.random.default_rng(0)
        s = rng.standard_normal((100_000, 2)) * np.array([1.0, 2.0])
        fit = gaussian_fit(s)
        assert np.abs(fit.cov - np.diag([1.0, 4.0])).max() < 5e-2

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError):
            gaussian_fit(np.zeros((1, 2)))

    def test_affine_equivariance(self):
        rng = np.random.default_rng(1)
        s = rng.standard_normal((500, 2))
        a = np.array([[2.0, 1.0], [0.0, -1.0]])
        b = np.array([3.0, -4.0])
        base = gaussian_fit(s)
        mapped = gaussian_fit(s @ a.T + b)
        np.testing.assert_allclose(mapped.mean, a @ base.mean + b, atol=1e-12)
        np.testing.assert_allclose(mapped.cov, a @ base.cov @ a.T, atol=1e-12)


class TestMatrixSqrt:
    def test_identity(self):
        np.testing.assert_allclose(matrix_sqrt_psd(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(matrix_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_reconstruction_on_random_gram(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            a = rng.standard_normal((2, 2))
            m = a @ a.T
            s = matrix_sqrt_psd(m)
            np.testing.assert_allclose(s @ s, m, atol=1e-10)
            assert np.linalg.eigvalsh(s).min() >= -1e-12

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            matrix_sqrt_psd(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_indefinite_rejected(self):
        with pytest.raises(ValueError):
            matrix_sqrt_psd(np.diag([1.0, -0.5]))


class TestW2Closed:
    def test_identical_is_zero(self):
        g = random_gaussian(np.random.default_rng(3))
        assert w2_gaussians(g, g) < 1e-9

    def test_point_masses(self):
        g1 = GaussianSpec([0.0, 0.0], np.zeros((2, 2)))
        g2 = GaussianSpec([3.0, 4.0], np.zeros((2, 2)))
        assert abs(w2_gaussians(g1, g2) - 5.0) < 1e-9

    def test_commuting_covariances(self):
        g1 = GaussianSpec([0.0, 0.0], np.eye(2))
        g2 = GaussianSpec([0.0, 0.0], 4.0 * np.eye(2))
        assert abs(w2_gaussians(g1, g2) - math.sqrt(2.0)) < 1e-9

    def test_symmetry_nonnegativity_identity(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            g1, g2 = random_gaussian(rng), random_gaussian(rng)
            d12 = w2_gaussians(g1, g2)
            d21 = w2_gaussians(g2, g1)
            assert d12 >= 0.0
            assert abs(d12 - d21) < 1e-9

    def test_triangle_inequality(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            g1, g2, g3 = (random_gaussian(rng) for _ in range(3))
            d13 = w2_gaussians(g1, g3)
            d12 = w2_gaussians(g1, g2)
            d23 = w2_gaussians(g2, g3)
            assert d13 <= d12 + d23 + 1e-8

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            w2_gaussians(
                GaussianSpec(np.zeros(2), np.eye(2)), GaussianSpec(np.zeros(3), np.eye(3))
            )

    def test_matches_empirical_assignment(self):
        rng = np.random.default_rng(6)
        for trial in range(3):
            g1, g2 = random_gaussian(rng), random_gaussian(rng)
            xs = g1.sample(2000, rng)
            ys = g2.sample(2000, rng)
            emp = empirical_w2(xs, ys)
            closed = w2_gaussians(g1, g2)
            assert abs(emp - closed) / closed < 0.05


class TestQualityMetrics:
    def test_sample_at_center_counted(self):
        assert high_quality_fraction(np.array([[0.0, 1.0]]), np.array([0.0, 1.0]), 0.43) == 1.0

    def test_boundary_excluded(self):
        samples = np.array([[0.43, 0.0]])
        assert high_quality_fraction(samples, np.zeros(2), 0.43) == 0.0

    def test_hand_distance(self):
        samples = np.array([[0.3, 1.3]])
        assert high_quality_fraction(samples, np.array([0.0, 1.0]), 0.43) == 1.0

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(7)
        samples = rng.standard_normal((200, 2))
        fracs = [
            high_quality_fraction(samples, np.zeros(2), t)
            for t in (0.1, 0.5, 1.0, 2.0, 3.0)
        ]
        assert all(a <= b for a, b in zip(fracs, fracs[1:]))

    def test_empty_samples_rejected(self):
        with pytest.raises(ValueError):
            high_quality_fraction(np.zeros((0, 2)), np.zeros(2), 0.43)

    def test_recovered_modes(self):
        assert recovered_modes([1, 2, 3]) == 1.0
        assert recovered_modes([0, 0, 0]) == 0.0
        assert abs(recovered_modes([1] * 359 + [0]) - 359 / 360) < 1e-12
