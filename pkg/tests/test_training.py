import numpy as np
import pytest

from grcgan.datasets import CircularSpec, circular_labels, sample_circular
from grcgan.gan import (
    ConditionEncoding,
    ExactFD,
    GanConfig,
    Ratio,
    SphereSurface,
    VanillaBCE,
    WassersteinGP,
    generate,
    train,
)
from grcgan.gan.losses import discriminator_loss, generator_loss
from grcgan.gan.train import TrainingDiverged
from grcgan.nn import LayerSpec, MlpSpec, Network
from grcgan.optim import Adam, AdamParams
from grcgan.tensor import backward


def tiny_specs():
    g = MlpSpec(4, (LayerSpec(8, "relu", batch_norm=True),), 2)
    d = MlpSpec(4, (LayerSpec(8, "relu"),), 1, "sigmoid")
    return g, d


def tiny_dataset(seed=0):
    spec = CircularSpec(n_labels=12, samples_per_label=4)
    labels, _ = circular_labels(spec)
    return sample_circular(spec, labels, np.random.default_rng(seed))


def tiny_config(**kw):
    defaults = dict(
        loss=VanillaBCE(),
        lam=0.1,
        reg_form=ExactFD(h=1e-3),
        n_critic=1,
        batch=8,
        iterations=5,
        adam_g=AdamParams(lr=1e-4),
        adam_d=AdamParams(lr=1e-4),
        noise_dim=2,
        seed=0,
    )
    defaults.update(kw)
    return GanConfig(**defaults)


def test_zero_iterations_returns_initialized_networks():
    g_spec, d_spec = tiny_specs()
    cfg = tiny_config(iterations=0)
    res = train(tiny_dataset(), g_spec, d_spec, cfg, ConditionEncoding("sincos"))
    ref_rng = np.random.default_rng(cfg.seed)
    ref_g = Network(g_spec, ref_rng)
    for p, q in zip(res.generator.parameters(), ref_g.parameters()):
        assert (p.data == q.data).all()
    assert len(res.log) == 0


def test_log_length_matches_iterations():
    g_spec, d_spec = tiny_specs()
    res = train(tiny_dataset(), g_spec, d_spec, tiny_config(iterations=7),
                ConditionEncoding("sincos"))
    assert len(res.log) == 7


def test_determinism_bit_identical_trajectories():
    g_spec, d_spec = tiny_specs()
    cfg = tiny_config(iterations=6)
    enc = ConditionEncoding("sincos")
    r1 = train(tiny_dataset(), g_spec, d_spec, cfg, enc)
    r2 = train(tiny_dataset(), g_spec, d_spec, cfg, enc)
    for p, q in zip(r1.generator.parameters(), r2.generator.parameters()):
        assert (p.data == q.data).all()
    for p, q in zip(r1.discriminator.parameters(), r2.discriminator.parameters()):
        assert (p.data == q.data).all()
    assert r1.log.d_loss == r2.log.d_loss
    assert r1.rng_state == r2.rng_state


def test_lambda_zero_matches_reference_unregularized_step():
    """One iteration with lam=0 equals a hand-rolled plain cGAN step on the
    same random stream."""
    g_spec, d_spec = tiny_specs()
    enc = ConditionEncoding("sincos")
    ds = tiny_dataset()
    cfg = tiny_config(lam=0.0, iterations=1)
    res = train(ds, g_spec, d_spec, cfg, enc)

    # Reference implementation of one unregularized step, same stream.
    rng = np.random.default_rng(cfg.seed)
    G = Network(g_spec, rng)
    D = Network(d_spec, rng)
    adam_g = Adam(G.parameters(), cfg.adam_g)
    adam_d = Adam(D.parameters(), cfg.adam_d)
    X, Y = ds.conditions, ds.outputs
    m = cfg.batch
    idx = rng.integers(0, len(ds), m)
    z = rng.standard_normal((m, cfg.noise_dim))
    x_enc = enc.encode(X[idx])
    fake = G.forward(np.concatenate([z, x_enc], axis=1), train=True).detach()
    d_loss = discriminator_loss(D, x_enc, Y[idx], fake.data, cfg, rng)
    D.zero_grad()
    backward(d_loss)
    adam_d.step()
    idx1 = rng.integers(0, len(ds), m)
    z = rng.standard_normal((m, cfg.noise_dim))
    D.set_requires_grad(False)
    total, _, _ = generator_loss(G, D, X[idx1], z, None, None, cfg, enc)
    G.zero_grad()
    backward(total)
    D.set_requires_grad(True)
    adam_g.step()

    for p, q in zip(res.generator.parameters(), G.parameters()):
        assert (p.data == q.data).all()
    for p, q in zip(res.discriminator.parameters(), D.parameters()):
        assert (p.data == q.data).all()


def test_ratio_form_trains():
    g_spec, d_spec = tiny_specs()
    cfg = tiny_config(
        reg_form=Ratio(), perturbation=SphereSurface(0.1), iterations=3
    )
    res = train(tiny_dataset(), g_spec, d_spec, cfg, ConditionEncoding("sincos"))
    assert all(np.isfinite(v) for v in res.log.g_reg)
    assert any(v != 0.0 for v in res.log.g_reg)


def test_wasserstein_critic_trains():
    g_spec, _ = tiny_specs()
    d_spec = MlpSpec(4, (LayerSpec(8, "leaky_relu", slope=0.1),), 1)
    cfg = tiny_config(
        loss=WassersteinGP(gp_coeff=0.1),
        reg_form=Ratio(),
        perturbation=SphereSurface(0.1),
        iterations=3,
    )
    res = train(tiny_dataset(), g_spec, d_spec, cfg, ConditionEncoding("sincos"))
    assert len(res.log) == 3


def test_no_interpolation_variant_penalizes_at_observed_conditions():
    g_spec, d_spec = tiny_specs()
    cfg = tiny_config(interpolate=False, iterations=3)
    res = train(tiny_dataset(), g_spec, d_spec, cfg, ConditionEncoding("sincos"))
    assert any(v != 0.0 for v in res.log.g_reg)


def test_n_critic_runs_inner_loop():
    g_spec, d_spec = tiny_specs()
    cfg = tiny_config(n_critic=3, iterations=2)
    res = train(tiny_dataset(), g_spec, d_spec, cfg, ConditionEncoding("sincos"))
    assert len(res.log) == 2


def test_empty_dataset_rejected():
    g_spec, d_spec = tiny_specs()
    from grcgan.datasets import LabeledDataset

    empty = LabeledDataset(np.zeros((0, 1)), np.zeros((0, 2)))
    with pytest.raises(ValueError):
        train(empty, g_spec, d_spec, tiny_config(), ConditionEncoding("sincos"))


def test_divergence_raises_with_snapshot():
    g_spec, _ = tiny_specs()
    # Four stacked hidden layers with an absurd learning rate overflow the
    # discriminator activations past float64 range within a few steps.
    d_spec = MlpSpec(4, tuple(LayerSpec(8, "relu") for _ in range(4)), 1, "sigmoid")
    cfg = tiny_config(
        adam_g=AdamParams(lr=1e100),
        adam_d=AdamParams(lr=1e100),
        iterations=10,
        lam=0.0,
    )
    with pytest.raises(TrainingDiverged) as exc_info:
        train(tiny_dataset(), g_spec, d_spec, cfg, ConditionEncoding("sincos"))
    assert "iteration" in exc_info.value.snapshot


class TestGenerate:
    def setup_method(self):
        g_spec, d_spec = tiny_specs()
        self.res = train(
            tiny_dataset(), g_spec, d_spec, tiny_config(iterations=2),
            ConditionEncoding("sincos"),
        )

    def test_zero_count_gives_empty_batch(self):
        out = generate(self.res.generator, np.array([0.3]), 0,
                       ConditionEncoding("sincos"), np.random.default_rng(0), 2)
        assert out.shape == (0, 2)

    def test_fixed_seed_reproduces(self):
        enc = ConditionEncoding("sincos")
        a = generate(self.res.generator, np.array([0.3]), 50, enc,
                     np.random.default_rng(5), 2)
        b = generate(self.res.generator, np.array([0.3]), 50, enc,
                     np.random.default_rng(5), 2)
        assert (a == b).all()

    def test_sample_count_scales(self):
        enc = ConditionEncoding("sincos")
        rng = np.random.default_rng(1)
        total = sum(
            generate(self.res.generator, np.array([a]), 100, enc, rng, 2).shape[0]
            for a in 2 * np.pi * np.arange(360) / 360
        )
        assert total == 36_000


def test_training_log_csv_round_trip(tmp_path):
    g_spec, d_spec = tiny_specs()
    res = train(tiny_dataset(), g_spec, d_spec, tiny_config(iterations=4),
                ConditionEncoding("sincos"))
    path = tmp_path / "log.csv"
    res.log.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "iter,d_loss,g_adv,g_reg,wall_ms"
    assert len(lines) == 5
    first = lines[1].split(",")
    assert int(first[0]) == 0
    assert float(first[1]) == res.log.d_loss[0]
