import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grcgan.gan import GaussianIso, SphereSurface
from grcgan.gan.samplers import (
    interpolate_conditions,
    sample_interpolated_conditions,
    sample_perturbation,
)


def test_interpolation_endpoints():
    x1 = np.array([[1.0, 2.0]])
    x2 = np.array([[-3.0, 5.0]])
    np.testing.assert_allclose(interpolate_conditions(x1, x2, np.array([1.0])), x1)
    np.testing.assert_allclose(interpolate_conditions(x1, x2, np.array([0.0])), x2)


def test_interpolation_quarter_point():
    x1 = np.array([[0.0, 0.0]])
    x2 = np.array([[2.0, 4.0]])
    out = interpolate_conditions(x1, x2, np.array([0.25]))
    np.testing.assert_allclose(out, [[1.5, 3.0]])


def test_interpolation_shape_mismatch():
    with pytest.raises(ValueError):
        interpolate_conditions(np.zeros((3, 2)), np.zeros((4, 2)), np.zeros(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 8), st.integers(1, 32))
def test_interpolated_points_stay_on_segment(seed, dim, m):
    rng = np.random.default_rng(seed)
    x1 = rng.standard_normal((m, dim)) * 10
    x2 = rng.standard_normal((m, dim)) * 10
    out = sample_interpolated_conditions(x1, x2, rng)
    lo = np.minimum(x1, x2) - 1e-12
    hi = np.maximum(x1, x2) + 1e-12
    assert ((out >= lo) & (out <= hi)).all()


def test_sphere_norms_exact():
    dx = sample_perturbation(8, SphereSurface(0.1), 1e-6, np.random.default_rng(0), n=500)
    np.testing.assert_allclose(np.linalg.norm(dx, axis=1), 0.1, atol=1e-12)


def test_sphere_dim_one_is_sign_flip():
    dx = sample_perturbation(1, SphereSurface(0.3), 0.0, np.random.default_rng(1), n=200)
    assert set(np.round(dx.ravel(), 12)) == {-0.3, 0.3}


def test_sphere_mean_is_zero_by_symmetry():
    n = 100_000
    dx = sample_perturbation(5, SphereSurface(1.0), 0.0, np.random.default_rng(2), n=n)
    # Coordinates of a uniform sphere point have variance 1/dim.
    stderr = np.sqrt(1.0 / 5.0 / n)
    assert (np.abs(dx.mean(axis=0)) < 3 * stderr).all()


def test_gaussian_iso_respects_floor():
    tau2 = 0.05
    dx = sample_perturbation(3, GaussianIso(0.05), tau2, np.random.default_rng(3), n=500)
    assert (np.linalg.norm(dx, axis=1) >= tau2).all()


def test_gaussian_iso_unreachable_floor_errors():
    with pytest.raises(RuntimeError):
        sample_perturbation(2, GaussianIso(1e-12), 1.0, np.random.default_rng(4), n=4)


def test_sphere_radius_below_floor_rejected():
    with pytest.raises(ValueError):
        sample_perturbation(2, SphereSurface(1e-9), 1e-6, np.random.default_rng(5))


def test_dim_zero_rejected():
    with pytest.raises(ValueError):
        sample_perturbation(0, SphereSurface(0.1), 0.0, np.random.default_rng(6))
