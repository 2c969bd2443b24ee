"""Bias-corrected Adam over lists of parameter tensors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor


@dataclass(frozen=True)
class AdamParams:
    lr: float = 1e-3
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self) -> None:
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        for name, b in (("beta1", self.beta1), ("beta2", self.beta2)):
            if not 0.0 < b < 1.0:
                raise ValueError(f"{name} must be in (0,1), got {b}")


class Adam:
    """Standard Adam; moment buffers are shaped like their parameters."""

    def __init__(self, params: list[Tensor], hp: AdamParams):
        hp.validate()
        self.params = params
        self.hp = hp
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self.t = 0

    def step(self) -> None:
        """Apply one update from the accumulated gradients.

        A non-finite gradient anywhere rejects the whole step so a diverging
        loss cannot corrupt the parameters silently.
        """
        hp = self.hp
        grads = []
        for p in self.params:
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if not np.isfinite(g).all():
                raise FloatingPointError("non-finite gradient; Adam step rejected")
            grads.append(g)
        self.t += 1
        bc1 = 1.0 - hp.beta1**self.t
        bc2 = 1.0 - hp.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= hp.beta1
            m += (1 - hp.beta1) * g
            v *= hp.beta2
            v += (1 - hp.beta2) * g * g
            # One scratch allocation per parameter tensor.
            step = v / bc2
            np.sqrt(step, out=step)
            step += hp.eps
            np.divide(m, step, out=step)
            step *= hp.lr / bc1
            p.data -= step

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
