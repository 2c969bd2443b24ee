"""The adversarial training loop and post-training sampling."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..nn import MlpSpec, Network
from ..optim import Adam
from ..tensor import Tensor, backward
from .config import ConditionEncoding, GanConfig, Ratio
from .losses import discriminator_loss, generator_loss
from .samplers import sample_interpolated_conditions, sample_perturbation

LOG_HEADER = "iter,d_loss,g_adv,g_reg,wall_ms"


@dataclass
class TrainingLog:
    d_loss: list[float] = field(default_factory=list)
    g_adv: list[float] = field(default_factory=list)
    g_reg: list[float] = field(default_factory=list)
    wall_ms: list[float] = field(default_factory=list)

    def append(self, d: float, adv: float, reg: float, wall: float) -> None:
        self.d_loss.append(d)
        self.g_adv.append(adv)
        self.g_reg.append(reg)
        self.wall_ms.append(wall)

    def __len__(self) -> int:
        return len(self.d_loss)

    def rows(self):
        for i in range(len(self.d_loss)):
            yield i, self.d_loss[i], self.g_adv[i], self.g_reg[i], self.wall_ms[i]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(LOG_HEADER + "\n")
            for i, d, adv, reg, wall in self.rows():
                fh.write(f"{i},{d!r},{adv!r},{reg!r},{wall:.3f}\n")


class TrainingDiverged(RuntimeError):
    """Raised when a loss goes non-finite; carries a diagnostic snapshot."""

    def __init__(self, message: str, snapshot: dict):
        super().__init__(message)
        self.snapshot = snapshot


@dataclass
class TrainResult:
    generator: Network
    discriminator: Network
    log: TrainingLog
    rng_state: dict


def train(
    dataset,
    g_spec: MlpSpec,
    d_spec: MlpSpec,
    config: GanConfig,
    encoding: ConditionEncoding,
    progress=None,
) -> TrainResult:
    """Run the full adversarial loop.

    Each of the ``iterations`` outer steps performs ``n_critic`` discriminator
    updates on fresh real batches and fresh noise, then one generator update.
    The generator update draws two independent condition batches, penalizes at
    points interpolated between them (or at the first batch itself when
    interpolation is disabled), and shares one noise batch between the
    adversarial and penalty terms.

    With ``lam == 0`` no penalty-related sampling happens at all, so the
    parameter trajectory matches a plain conditional GAN consuming the same
    random stream.  A non-finite loss aborts with a diagnostic snapshot.
    """
    config.validate()
    conditions = np.ascontiguousarray(np.asarray(dataset.conditions, dtype=np.float64))
    outputs = np.ascontiguousarray(np.asarray(dataset.outputs, dtype=np.float64))
    if conditions.ndim == 1:
        conditions = conditions.reshape(-1, 1)
    if conditions.shape[0] != outputs.shape[0] or conditions.shape[0] == 0:
        raise ValueError("dataset must be non-empty with aligned rows")

    rng = np.random.default_rng(config.seed)
    G = Network(g_spec, rng)
    D = Network(d_spec, rng)
    adam_g = Adam(G.parameters(), config.adam_g)
    adam_d = Adam(D.parameters(), config.adam_d)
    log = TrainingLog()

    n_rows = conditions.shape[0]
    m = config.batch
    use_ratio = isinstance(config.reg_form, Ratio)

    for k in range(config.iterations):
        t0 = time.perf_counter()
        try:
            d_losses = []
            for _ in range(config.n_critic):
                idx = rng.integers(0, n_rows, m)
                x = conditions[idx]
                y = outputs[idx]
                z = rng.standard_normal((m, config.noise_dim))
                x_enc = encoding.encode(x)
                fake = G.forward(np.concatenate([z, x_enc], axis=1), train=True).detach()
                d_loss = discriminator_loss(D, x_enc, y, fake.data, config, rng)
                D.zero_grad()
                backward(d_loss)
                adam_d.step()
                d_losses.append(d_loss.item())

            idx1 = rng.integers(0, n_rows, m)
            x1 = conditions[idx1]
            x_pen = None
            dx = None
            if config.lam > 0.0:
                if config.interpolate:
                    idx2 = rng.integers(0, n_rows, m)
                    x2 = conditions[idx2]
            z = rng.standard_normal((m, config.noise_dim))
            if config.lam > 0.0:
                if config.interpolate:
                    x_pen = sample_interpolated_conditions(x1, x2, rng)
                else:
                    x_pen = x1
                if use_ratio:
                    dx = sample_perturbation(
                        x1.shape[1], config.perturbation, config.tau2, rng, n=m
                    )
            D.set_requires_grad(False)
            try:
                g_total, g_adv, g_reg = generator_loss(
                    G, D, x1, z, x_pen, dx, config, encoding
                )
                G.zero_grad()
                backward(g_total)
            finally:
                D.set_requires_grad(True)
            adam_g.step()
        except FloatingPointError as exc:
            raise TrainingDiverged(
                f"training diverged at iteration {k}: {exc}",
                {
                    "iteration": k,
                    "d_loss_tail": log.d_loss[-10:],
                    "g_adv_tail": log.g_adv[-10:],
                    "g_reg_tail": log.g_reg[-10:],
                },
            ) from exc

        wall = (time.perf_counter() - t0) * 1e3
        log.append(float(np.mean(d_losses)), g_adv, g_reg, wall)
        if progress is not None:
            progress(k, log)

    return TrainResult(G, D, log, rng.bit_generator.state)


def generate(
    net: Network,
    x_raw: np.ndarray,
    n: int,
    encoding: ConditionEncoding,
    rng: np.random.Generator,
    noise_dim: int,
) -> np.ndarray:
    """n samples from the generator at one condition, batch-norm in eval mode."""
    x_raw = np.asarray(x_raw, dtype=np.float64).reshape(1, -1)
    z = rng.standard_normal((n, noise_dim))
    enc = np.repeat(encoding.encode(x_raw), n, axis=0)
    out = net.forward(np.concatenate([z, enc], axis=1), train=False)
    return out.data.copy()
