"""Training configuration: loss family, penalty form, samplers, loop sizes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..optim import AdamParams


@dataclass(frozen=True)
class VanillaBCE:
    """Minimax cGAN loss with a sigmoid discriminator."""

    kind: str = field(default="vanilla_bce", init=False)


@dataclass(frozen=True)
class WassersteinGP:
    """Wasserstein critic with a finite-difference gradient penalty.

    The penalty pushes the directional derivative of the critic along a
    random unit direction toward 1, measured at points interpolated between
    real and fake inputs with uniform weights.
    """

    gp_coeff: float = 0.1
    delta: float = 1e-3
    kind: str = field(default="wasserstein_gp", init=False)


@dataclass(frozen=True)
class ExactFD:
    """Condition-Jacobian penalty via central differences with step h."""

    h: float = 1e-3
    kind: str = field(default="exact_fd", init=False)


@dataclass(frozen=True)
class Ratio:
    """Perturbation-ratio penalty ||G(x+dx,z)-G(x,z)|| / ||dx||, capped at tau1."""

    kind: str = field(default="ratio", init=False)


@dataclass(frozen=True)
class SphereSurface:
    """Perturbations drawn uniformly on the sphere of the given radius."""

    radius: float = 0.1
    kind: str = field(default="sphere_surface", init=False)


@dataclass(frozen=True)
class GaussianIso:
    """Isotropic Gaussian perturbations with scale sigma."""

    sigma: float = 0.1
    kind: str = field(default="gaussian_iso", init=False)


@dataclass(frozen=True)
class ConditionEncoding:
    """How raw conditions enter the networks.

    ``raw`` feeds them unchanged; ``sincos`` maps a scalar angle x to
    (sin x, cos x).  Penalties always perturb the raw condition and re-encode,
    so for ``sincos`` the regularized derivative is taken with respect to the
    angle itself.
    """

    kind: str = "raw"

    def encoded_dim(self, raw_dim: int) -> int:
        if self.kind == "raw":
            return raw_dim
        if self.kind == "sincos":
            if raw_dim != 1:
                raise ValueError("sincos encoding expects a scalar condition")
            return 2
        raise ValueError(f"unknown encoding {self.kind!r}")

    def encode(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if self.kind == "raw":
            return x
        if self.kind == "sincos":
            if x.shape[1] != 1:
                raise ValueError("sincos encoding expects a scalar condition")
            return np.concatenate([np.sin(x), np.cos(x)], axis=1)
        raise ValueError(f"unknown encoding {self.kind!r}")


@dataclass(frozen=True)
class GanConfig:
    """Everything a training run needs besides the data and architectures."""

    loss: VanillaBCE | WassersteinGP = field(default_factory=VanillaBCE)
    lam: float = 0.0
    reg_form: ExactFD | Ratio = field(default_factory=ExactFD)
    tau1: float = math.inf
    tau2: float = 1e-6
    perturbation: SphereSurface | GaussianIso | None = None
    n_critic: int = 1
    batch: int = 128
    iterations: int = 6000
    adam_g: AdamParams = field(default_factory=lambda: AdamParams(lr=5e-5))
    adam_d: AdamParams = field(default_factory=lambda: AdamParams(lr=5e-5))
    noise_dim: int = 2
    seed: int = 0
    interpolate: bool = True
    nonsaturating: bool = False

    def validate(self) -> None:
        if self.lam < 0:
            raise ValueError(f"regularization coefficient must be >= 0, got {self.lam}")
        if isinstance(self.reg_form, ExactFD) and self.reg_form.h <= 0:
            raise ValueError("finite-difference step h must be positive")
        if self.tau1 <= 0:
            raise ValueError("tau1 must be positive (may be +inf)")
        if self.tau2 < 0:
            raise ValueError("tau2 must be >= 0")
        if isinstance(self.reg_form, Ratio) and self.lam > 0:
            if self.perturbation is None:
                raise ValueError("ratio penalty needs a perturbation law")
            if isinstance(self.perturbation, SphereSurface) and self.perturbation.radius < self.tau2:
                raise ValueError("sphere radius must be >= tau2")
        if isinstance(self.loss, WassersteinGP):
            if self.loss.gp_coeff < 0 or self.loss.delta <= 0:
                raise ValueError("gradient penalty needs gp_coeff >= 0 and delta > 0")
        if self.n_critic < 1:
            raise ValueError("n_critic must be >= 1")
        if self.batch < 1 or self.iterations < 0 or self.noise_dim < 1:
            raise ValueError("batch >= 1, iterations >= 0, noise_dim >= 1 required")
        self.adam_g.validate()
        self.adam_d.validate()

    def to_dict(self) -> dict:
        def tag(obj):
            if obj is None:
                return None
            d = {"kind": obj.kind}
            for k, v in obj.__dict__.items():
                if k != "kind":
                    d[k] = v
            return d

        return {
            "loss": tag(self.loss),
            "lam": self.lam,
            "reg_form": tag(self.reg_form),
            "tau1": "inf" if math.isinf(self.tau1) else self.tau1,
            "tau2": self.tau2,
            "perturbation": tag(self.perturbation),
            "n_critic": self.n_critic,
            "batch": self.batch,
            "iterations": self.iterations,
            "adam_g": self.adam_g.__dict__.copy(),
            "adam_d": self.adam_d.__dict__.copy(),
            "noise_dim": self.noise_dim,
            "seed": self.seed,
            "interpolate": self.interpolate,
            "nonsaturating": self.nonsaturating,
        }

    @staticmethod
    def from_dict(d: dict) -> "GanConfig":
        def untag(t, table):
            if t is None:
                return None
            kind = t["kind"]
            rest = {k: v for k, v in t.items() if k != "kind"}
            return table[kind](**rest)

        loss = untag(d["loss"], {"vanilla_bce": VanillaBCE, "wasserstein_gp": WassersteinGP})
        reg = untag(d["reg_form"], {"exact_fd": ExactFD, "ratio": Ratio})
        pert = untag(
            d.get("perturbation"),
            {"sphere_surface": SphereSurface, "gaussian_iso": GaussianIso},
        )
        tau1 = d["tau1"]
        return GanConfig(
            loss=loss,
            lam=d["lam"],
            reg_form=reg,
            tau1=math.inf if tau1 == "inf" else float(tau1),
            tau2=d["tau2"],
            perturbation=pert,
            n_critic=d["n_critic"],
            batch=d["batch"],
            iterations=d["iterations"],
            adam_g=AdamParams(**d["adam_g"]),
            adam_d=AdamParams(**d["adam_d"]),
            noise_dim=d["noise_dim"],
            seed=d["seed"],
            interpolate=d.get("interpolate", True),
            nonsaturating=d.get("nonsaturating", False),
        )
