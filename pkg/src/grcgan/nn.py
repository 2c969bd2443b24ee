"""Dense networks: layer specs, forward passes, and checkpointing.

Networks are plain stacks of fully connected layers with optional batch
normalization and an activation per hidden block.  Construction is driven by
:class:`MlpSpec` so architectures can be described as data, checkpointed, and
rebuilt exactly.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .tensor import Tensor

ACTIVATIONS = ("relu", "leaky_relu", "sigmoid", "identity")

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class LayerSpec:
    """One hidden block: fc -> width, optional batch norm, activation."""

    width: int
    activation: str = "relu"
    slope: float = 0.0
    batch_norm: bool = False

    def validate(self) -> None:
        if self.width < 1:
            raise ValueError(f"layer width must be >= 1, got {self.width}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.activation == "leaky_relu" and not 0.0 < self.slope < 1.0:
            raise ValueError(f"leaky_relu slope must be in (0,1), got {self.slope}")


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden: tuple[LayerSpec, ...]
    output_dim: int
    output_activation: str = "identity"

    def validate(self) -> None:
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be >= 1")
        if self.output_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.output_activation!r}")
        for layer in self.hidden:
            layer.validate()

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden": [
                {
                    "width": h.width,
                    "activation": h.activation,
                    "slope": h.slope,
                    "batch_norm": h.batch_norm,
                }
                for h in self.hidden
            ],
            "output_dim": self.output_dim,
            "output_activation": self.output_activation,
        }

    @staticmethod
    def from_dict(d: dict) -> "MlpSpec":
        return MlpSpec(
            input_dim=d["input_dim"],
            hidden=tuple(LayerSpec(**h) for h in d["hidden"]),
            output_dim=d["output_dim"],
            output_activation=d["output_activation"],
        )


def circular_generator_spec() -> MlpSpec:
    """Generator for the circular benchmark: 6 x (fc 100, BN, ReLU), fc 2.

    Input is concat(z in R^2, sin(angle), cos(angle)).
    """
    return MlpSpec(
        input_dim=4,
        hidden=tuple(LayerSpec(100, "relu", batch_norm=True) for _ in range(6)),
        output_dim=2,
    )


def circular_discriminator_spec() -> MlpSpec:
    """Discriminator for the circular benchmark: 5 x (fc 100, ReLU), fc 1, sigmoid.

    Input is concat(sample in R^2, sin(angle), cos(angle)).
    """
    return MlpSpec(
        input_dim=4,
        hidden=tuple(LayerSpec(100, "relu") for _ in range(5)),
        output_dim=1,
        output_activation="sigmoid",
    )


def mvn_generator_spec(cond_dim: int, out_dim: int) -> MlpSpec:
    """Generator for the multivariate Gaussian benchmark: 3 x (fc 512, LeakyReLU 0.1)."""
    return MlpSpec(
        input_dim=out_dim + cond_dim,
        hidden=tuple(LayerSpec(512, "leaky_relu", slope=0.1) for _ in range(3)),
        output_dim=out_dim,
    )


def mvn_discriminator_spec(cond_dim: int, out_dim: int) -> MlpSpec:
    """Critic for the multivariate Gaussian benchmark: linear output, no sigmoid."""
    return MlpSpec(
        input_dim=out_dim + cond_dim,
        hidden=tuple(LayerSpec(512, "leaky_relu", slope=0.1) for _ in range(3)),
        output_dim=1,
    )


class Dense:
    """Affine map x @ W + b with uniform init of bound 1/sqrt(fan_in)."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        bound = 1.0 / np.sqrt(in_dim)
        self.W = Tensor(rng.uniform(-bound, bound, (in_dim, out_dim)), requires_grad=True)
        self.b = Tensor(rng.uniform(-bound, bound, (1, out_dim)), requires_grad=True)

    def __call__(self, x: Tensor, train: bool) -> Tensor:
        return T.add(T.matmul(x, self.W), self.b)

    def parameters(self) -> list[Tensor]:
        return [self.W, self.b]


class BatchNorm:
    """Per-feature batch normalization.

    Train mode normalizes by the biased batch statistics and folds them into
    the running buffers with momentum 0.9 (the same biased variance feeds the
    running accumulator; at the batch sizes used here the n/(n-1) factor is
    far below metric resolution).  Eval mode is a fixed affine map built from
    the running statistics, with no dependence on the batch.
    """

    def __init__(self, dim: int, momentum: float = 0.9, eps: float = 1e-5):
        if not 0.0 < momentum < 1.0:
            raise ValueError(f"momentum must be in (0,1), got {momentum}")
        self.gamma = Tensor(np.ones((1, dim)), requires_grad=True)
        self.beta = Tensor(np.zeros((1, dim)), requires_grad=True)
        self.running_mean = np.zeros((1, dim))
        self.running_var = np.ones((1, dim))
        self.momentum = momentum
        self.eps = eps

    def __call__(self, x: Tensor, train: bool, update_stats: bool | None = None) -> Tensor:
        gamma, beta, eps = self.gamma, self.beta, self.eps
        if train:
            n = x.data.shape[0]
            mean = x.data.mean(axis=0, keepdims=True)
            var = x.data.var(axis=0, keepdims=True)  # biased
            if update_stats is None or update_stats:
                self.running_mean = (
                    self.momentum * self.running_mean + (1 - self.momentum) * mean
                )
                self.running_var = (
                    self.momentum * self.running_var + (1 - self.momentum) * var
                )
            inv_std = 1.0 / np.sqrt(var + eps)
            xhat = (x.data - mean) * inv_std

            def bw(out):
                dy = out.grad
                if gamma.requires_grad:
                    gamma.accumulate_grad((dy * xhat).sum(axis=0, keepdims=True), fresh=True)
                if beta.requires_grad:
                    beta.accumulate_grad(dy.sum(axis=0, keepdims=True), fresh=True)
                if x.requires_grad:
                    dxhat = dy * gamma.data
                    # Biased-variance batch norm backward.
                    dx = (
                        inv_std
                        / n
                        * (
                            n * dxhat
                            - dxhat.sum(axis=0, keepdims=True)
                            - xhat * (dxhat * xhat).sum(axis=0, keepdims=True)
                        )
                    )
                    x.accumulate_grad(dx, fresh=True)

            return T._make(gamma.data * xhat + beta.data, (x, gamma, beta), bw)

        inv_std = 1.0 / np.sqrt(self.running_var + eps)
        xhat = (x.data - self.running_mean) * inv_std

        def bw_eval(out):
            dy = out.grad
            if gamma.requires_grad:
                gamma.accumulate_grad((dy * xhat).sum(axis=0, keepdims=True), fresh=True)
            if beta.requires_grad:
                beta.accumulate_grad(dy.sum(axis=0, keepdims=True), fresh=True)
            if x.requires_grad:
                x.accumulate_grad(dy * gamma.data * inv_std, fresh=True)

        return T._make(gamma.data * xhat + beta.data, (x, gamma, beta), bw_eval)

    def parameters(self) -> list[Tensor]:
        return [self.gamma, self.beta]


def _apply_activation(x: Tensor, kind: str, slope: float) -> Tensor:
    if kind == "relu":
        return T.relu(x)
    if kind == "leaky_relu":
        return T.leaky_relu(x, slope)
    if kind == "sigmoid":
        return T.sigmoid(x)
    return x


class Network:
    """A dense network instantiated from an :class:`MlpSpec`."""

    def __init__(self, spec: MlpSpec, rng: np.random.Generator):
        spec.validate()
        self.spec = spec
        self.blocks: list[tuple[Dense, BatchNorm | None, str, float]] = []
        in_dim = spec.input_dim
        for h in spec.hidden:
            dense = Dense(in_dim, h.width, rng)
            bn = BatchNorm(h.width) if h.batch_norm else None
            self.blocks.append((dense, bn, h.activation, h.slope))
            in_dim = h.width
        self.out_layer = Dense(in_dim, spec.output_dim, rng)

    def forward(
        self,
        batch: Tensor | np.ndarray,
        train: bool,
        update_stats: bool | None = None,
    ) -> Tensor:
        """Run the network; records a graph when any input/parameter needs one.

        In eval mode batch norm uses running statistics only, so the map is a
        fixed function of the input.  ``update_stats=False`` keeps train-mode
        batch normalization but leaves the running buffers untouched; penalty
        probes use this so the buffers track only the operational input
        distribution.
        """
        x = batch if isinstance(batch, Tensor) else Tensor(batch)
        if x.shape[1] != self.spec.input_dim:
            raise ValueError(
                f"input has {x.shape[1]} columns, network expects {self.spec.input_dim}"
            )
        for dense, bn, act, slope in self.blocks:
            x = dense(x, train)
            if bn is not None:
                x = bn(x, train, update_stats)
            x = _apply_activation(x, act, slope)
        x = self.out_layer(x, train)
        x = _apply_activation(x, self.spec.output_activation, 0.0)
        if not np.isfinite(x.data).all():
            raise FloatingPointError("non-finite network output")
        return x

    @property
    def has_batch_norm(self) -> bool:
        return any(bn is not None for _, bn, _, _ in self.blocks)

    def parameters(self) -> list[Tensor]:
        params: list[Tensor] = []
        for dense, bn, _, _ in self.blocks:
            params.extend(dense.parameters())
            if bn is not None:
                params.extend(bn.parameters())
        params.extend(self.out_layer.parameters())
        return params

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def set_requires_grad(self, flag: bool) -> None:
        for p in self.parameters():
            p.requires_grad = flag

    def state_arrays(self) -> dict[str, np.ndarray]:
        """All parameter and running-stat arrays keyed by a stable name."""
        out: dict[str, np.ndarray] = {}
        for i, (dense, bn, _, _) in enumerate(self.blocks):
            out[f"block{i}.W"] = dense.W.data
            out[f"block{i}.b"] = dense.b.data
            if bn is not None:
                out[f"block{i}.gamma"] = bn.gamma.data
                out[f"block{i}.beta"] = bn.beta.data
                out[f"block{i}.running_mean"] = bn.running_mean
                out[f"block{i}.running_var"] = bn.running_var
        out["out.W"] = self.out_layer.W.data
        out["out.b"] = self.out_layer.b.data
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for i, (dense, bn, _, _) in enumerate(self.blocks):
            dense.W.data = np.array(arrays[f"block{i}.W"], dtype=np.float64)
            dense.b.data = np.array(arrays[f"block{i}.b"], dtype=np.float64)
            if bn is not None:
                bn.gamma.data = np.array(arrays[f"block{i}.gamma"], dtype=np.float64)
                bn.beta.data = np.array(arrays[f"block{i}.beta"], dtype=np.float64)
                bn.running_mean = np.array(arrays[f"block{i}.running_mean"], dtype=np.float64)
                bn.running_var = np.array(arrays[f"block{i}.running_var"], dtype=np.float64)
        self.out_layer.W.data = np.array(arrays["out.W"], dtype=np.float64)
        self.out_layer.b.data = np.array(arrays["out.b"], dtype=np.float64)


def save_checkpoint(path, net: Network, rng_state: dict | None = None,
                    extra: dict | None = None) -> None:
    """Write spec + parameters + BN buffers + RNG state; round-trip is bit-exact."""
    header = {
        "version": CHECKPOINT_VERSION,
        "spec": net.spec.to_dict(),
        "rng_state": rng_state,
        "extra": extra or {},
    }
    arrays = dict(net.state_arrays())
    arrays["__header__"] = np.frombuffer(
        json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8
    )
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> tuple[Network, dict | None, dict]:
    """Rebuild a network from :func:`save_checkpoint` output."""
    with np.load(path) as data:
        header = json.loads(bytes(data["__header__"]).decode("utf-8"))
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {header.get('version')}")
        spec = MlpSpec.from_dict(header["spec"])
        net = Network(spec, np.random.default_rng(0))
        net.load_state_arrays({k: data[k] for k in data.files if k != "__header__"})
    return net, header.get("rng_state"), header.get("extra", {})
