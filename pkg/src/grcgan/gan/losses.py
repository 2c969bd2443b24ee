"""Adversarial objectives for both network roles.

Discriminator inputs are always concat(sample, encoded condition).  The
fake term conditions on the same x as the paired real sample, so the
discriminator judges (condition, sample) pairs in both branches.
"""

from __future__ import annotations

import numpy as np

from .. import tensor as T
from ..nn import Network
from ..tensor import Tensor
from .config import ConditionEncoding, GanConfig, VanillaBCE, WassersteinGP
from .penalties import condition_jacobian_penalty, condition_ratio_penalty
from .config import ExactFD, Ratio

PROB_CLAMP = 1e-7


def d_input(samples: np.ndarray | Tensor, x_enc: np.ndarray) -> Tensor:
    if isinstance(samples, Tensor):
        return T.concat_cols([samples, Tensor(x_enc)])
    return Tensor(np.concatenate([samples, x_enc], axis=1))


def _mean_log(p: Tensor) -> Tensor:
    return T.mean_all(T.log(T.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)))


def discriminator_loss(
    D: Network,
    x_enc: np.ndarray,
    y_real: np.ndarray,
    y_fake: np.ndarray,
    config: GanConfig,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Loss minimized by the discriminator update.

    Vanilla form returns the negated log-likelihood objective so gradient
    descent performs the ascent step.  The Wasserstein form is
    mean D(fake) - mean D(real) plus the finite-difference gradient penalty.
    """
    if y_real.shape != y_fake.shape or y_real.shape[0] != x_enc.shape[0]:
        raise ValueError("real and fake batches must align with the condition batch")
    real_in = d_input(y_real, x_enc)
    fake_in = d_input(y_fake, x_enc)
    m = x_enc.shape[0]

    def scores(pair_a: Tensor, pair_b: Tensor) -> tuple[Tensor, Tensor]:
        # One stacked pass when batch statistics cannot couple the halves.
        if D.has_batch_norm:
            return D.forward(pair_a, train=True), D.forward(pair_b, train=True)
        stacked = D.forward(
            Tensor(np.concatenate([pair_a.data, pair_b.data], axis=0)), train=True
        )
        return T.slice_rows(stacked, 0, m), T.slice_rows(stacked, m, 2 * m)

    if isinstance(config.loss, VanillaBCE):
        p_real, p_fake = scores(real_in, fake_in)
        objective = T.add(_mean_log(p_real), _mean_log(T.sub(Tensor(1.0), p_fake)))
        return T.neg(objective)
    if isinstance(config.loss, WassersteinGP):
        if rng is None:
            raise ValueError("the gradient-penalty loss needs an rng")
        d_real, d_fake = scores(real_in, fake_in)
        base = T.sub(T.mean_all(d_fake), T.mean_all(d_real))
        gp = _directional_gradient_penalty(
            D, real_in.data, fake_in.data, config.loss.delta, rng
        )
        return T.add(base, T.scale(gp, config.loss.gp_coeff))
    raise TypeError(f"unknown loss family {config.loss!r}")


def _directional_gradient_penalty(
    D: Network,
    real_in: np.ndarray,
    fake_in: np.ndarray,
    delta: float,
    rng: np.random.Generator,
) -> Tensor:
    """mean(((D(u + delta v) - D(u)) / delta - 1)^2).

    u interpolates between paired real and fake inputs with uniform weights;
    v is uniform on the unit sphere of the input space.  Expressed entirely
    through forward passes, so only first-order gradients are needed.
    """
    m, dim = real_in.shape
    t = rng.uniform(size=(m, 1))
    u = t * real_in + (1.0 - t) * fake_in
    v = rng.standard_normal((m, dim))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    while (norms == 0).any():
        bad = (norms == 0).ravel()
        v[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(v, axis=1, keepdims=True)
    v /= norms
    if D.has_batch_norm:
        up = D.forward(u + delta * v, train=True, update_stats=False)
        base = D.forward(u, train=True, update_stats=False)
    else:
        stacked = D.forward(
            np.concatenate([u + delta * v, u], axis=0), train=True, update_stats=False
        )
        up = T.slice_rows(stacked, 0, m)
        base = T.slice_rows(stacked, m, 2 * m)
    slope = T.scale(T.sub(up, base), 1.0 / delta)
    dev = T.sub(slope, Tensor(1.0))
    return T.mean_all(T.mul(dev, dev))


def generator_loss(
    G: Network,
    D: Network,
    x_raw: np.ndarray,
    z: np.ndarray,
    x_pen_raw: np.ndarray | None,
    dx: np.ndarray | None,
    config: GanConfig,
    encoding: ConditionEncoding,
) -> tuple[Tensor, float, float]:
    """Total generator loss plus the adversarial and penalty values for logging.

    The adversarial term follows the loss family (vanilla: the saturating
    form log(1 - D(fake)) unless ``nonsaturating`` is set; Wasserstein:
    -mean D(fake)).  The penalty is evaluated at ``x_pen_raw`` with the same
    noise batch and added with weight ``lam``; the total is affine in lam
    with slope equal to the penalty value.
    """
    x_enc = encoding.encode(x_raw)
    fake = G.forward(np.concatenate([z, x_enc], axis=1), train=True)
    d_out = D.forward(d_input(fake, x_enc), train=True)
    if isinstance(config.loss, VanillaBCE):
        if config.nonsaturating:
            adv = T.neg(_mean_log(d_out))
        else:
            adv = _mean_log(T.sub(Tensor(1.0), d_out))
    elif isinstance(config.loss, WassersteinGP):
        adv = T.neg(T.mean_all(d_out))
    else:
        raise TypeError(f"unknown loss family {config.loss!r}")

    if config.lam == 0.0:
        return adv, adv.item(), 0.0

    if x_pen_raw is None:
        raise ValueError("penalty conditions required when lam > 0")
    if isinstance(config.reg_form, ExactFD):
        reg = condition_jacobian_penalty(
            G, encoding, x_pen_raw, z, config.reg_form.h, train=True
        )
    elif isinstance(config.reg_form, Ratio):
        if dx is None:
            raise ValueError("ratio penalty requires perturbations")
        reg = condition_ratio_penalty(
            G, encoding, x_pen_raw, z, dx, config.tau1, config.tau2, train=True
        )
    else:
        raise TypeError(f"unknown penalty form {config.reg_form!r}")
    total = T.add(adv, T.scale(reg, config.lam))
    return total, adv.item(), reg.item()
