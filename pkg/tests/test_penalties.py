import math

import numpy as np
import pytest

from grcgan import tensor as T
from grcgan.gan import ConditionEncoding, SphereSurface
from grcgan.gan.penalties import (
    condition_jacobian_penalty,
    fd_jacobian_penalty,
    generator_condition_map,
    ratio_penalty,
)
from grcgan.gan.samplers import sample_perturbation
from grcgan.nn import LayerSpec, MlpSpec, Network
from grcgan.penalty_checks import penalty_check_suite
from grcgan.tensor import Tensor, backward


def linear_map(a: np.ndarray):
    mat = Tensor(a, requires_grad=True)

    def g_of_x(x_raw):
        return T.matmul(Tensor(x_raw), mat)

    return g_of_x, mat


def test_jacobian_penalty_linear_equals_frobenius_for_any_h():
    a = 2.0 * np.eye(2)
    g, _ = linear_map(a)
    x = np.random.default_rng(0).standard_normal((7, 2))
    for h in (1e-6, 1e-3, 0.5, 2.0):
        pen = fd_jacobian_penalty(g, x, h)
        assert abs(pen.item() - math.sqrt(8.0)) < 1e-10


def test_jacobian_penalty_random_linear_matches_frobenius():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((3, 4))
    g, _ = linear_map(a)
    pen = fd_jacobian_penalty(g, rng.standard_normal((5, 3)), h=0.01)
    assert abs(pen.item() - np.linalg.norm(a)) < 1e-10


def test_jacobian_penalty_constant_generator_is_zero_and_differentiable():
    w = Tensor(np.zeros((2, 2)), requires_grad=True)

    def g_const(x_raw):
        return T.matmul(Tensor(np.zeros_like(x_raw)), w)

    pen = fd_jacobian_penalty(g_const, np.random.default_rng(2).standard_normal((4, 2)), 1e-3)
    assert pen.item() == 0.0
    backward(pen)
    assert np.isfinite(w.grad).all()


def test_jacobian_penalty_through_angle_encoding():
    # Generator returning the encoded angle itself has unit angle-derivative:
    # d/dx (sin x, cos x) has norm 1 everywhere.
    enc = ConditionEncoding("sincos")

    def g_of_x(x_raw):
        return Tensor(enc.encode(x_raw), requires_grad=True)

    pen = fd_jacobian_penalty(g_of_x, np.zeros((1, 1)), h=1e-4)
    assert abs(pen.item() - 1.0) < 1e-7  # within O(h^2)


def test_ratio_penalty_isotropic_linear():
    g, _ = linear_map(2.0 * np.eye(2))
    rng = np.random.default_rng(3)
    dx = sample_perturbation(2, SphereSurface(0.1), 0.0, rng, n=6)
    pen = ratio_penalty(g, rng.standard_normal((6, 2)), dx, tau1=math.inf)
    assert abs(pen.item() - 2.0) < 1e-12


def test_ratio_penalty_clamp():
    g, _ = linear_map(5.0 * np.eye(2))
    rng = np.random.default_rng(4)
    dx = sample_perturbation(2, SphereSurface(0.1), 0.0, rng, n=6)
    pen = ratio_penalty(g, rng.standard_normal((6, 2)), dx, tau1=3.0)
    assert abs(pen.item() - 3.0) < 1e-12


def test_ratio_penalty_first_order_expansion():
    # G(x) = (x1^2, 0) at x = (1, 0) with dx = (1e-3, 0): ratio ~ 2.
    def g_quad(x_raw):
        t = Tensor(x_raw[:, :1], requires_grad=True)
        return T.concat_cols([T.mul(t, t), Tensor(np.zeros((x_raw.shape[0], 1)))])

    pen = ratio_penalty(g_quad, np.array([[1.0, 0.0]]), np.array([[1e-3, 0.0]]), math.inf)
    assert abs(pen.item() - 2.0) < 1e-3


def test_ratio_penalty_bounded_by_largest_singular_value():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 2))
    g, _ = linear_map(a)
    sigma_max = np.linalg.svd(a, compute_uv=False).max()
    for trial in range(20):
        dx = sample_perturbation(3, SphereSurface(0.05), 0.0, rng, n=8)
        pen = ratio_penalty(g, rng.standard_normal((8, 3)), dx, tau1=math.inf)
        assert pen.item() <= sigma_max + 1e-10


def test_ratio_penalty_norm_floor_enforced():
    g, _ = linear_map(np.eye(2))
    with pytest.raises(ValueError):
        ratio_penalty(g, np.zeros((2, 2)), np.zeros((2, 2)), math.inf, tau2=1e-6)


def test_penalty_gradients_match_finite_differences():
    results = penalty_check_suite(seed=11)
    failing = [r for r in results if not r.passed]
    assert not failing, f"penalty gradient checks failed: {failing}"


def test_network_condition_map_shares_noise():
    rng = np.random.default_rng(6)
    net = Network(
        MlpSpec(4, (LayerSpec(8, "relu"),), 2),
        rng,
    )
    enc = ConditionEncoding("raw")
    z = rng.standard_normal((5, 2))
    g = generator_condition_map(net, enc, z, train=True)
    x = rng.standard_normal((5, 2))
    out1 = g(x)
    out2 = g(x)
    np.testing.assert_allclose(out1.data, out2.data)
    pen = condition_jacobian_penalty(net, enc, x, z, h=1e-3)
    assert np.isfinite(pen.item())
