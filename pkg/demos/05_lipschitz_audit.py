"""Auditing the conditional-Lipschitz property of a generator.

If every fixed-noise output moves at most K * ||x1 - x2|| when the condition
moves, the fitted distance between the two conditional distributions is
bounded by K * ||x1 - x2|| as well.  The audit estimates both sides from
shared noise draws; the translation generator x + z saturates the bound.
"""

import numpy as np

from grcgan.metrics import lipschitz_audit

rng = np.random.default_rng(0)


def translation(x1, x2, n_z, rng):
    z = rng.standard_normal((n_z, x1.size))
    return x1 + z, x2 + z, z


def scaled_translation(x1, x2, n_z, rng):
    z = rng.standard_normal((n_z, x1.size))
    return 3.0 * x1 + z, 3.0 * x2 + z, z


def noisy_conditional(x1, x2, n_z, rng):
    # Output spread also depends on the condition: bound holds with slack.
    z = rng.standard_normal((n_z, x1.size))
    return x1 + 0.5 * z, x2 + 0.8 * z, z


for name, sampler in [
    ("translation x+z (tight)", translation),
    ("3x + z (K=3, tight)", scaled_translation),
    ("condition-dependent spread", noisy_conditional),
]:
    audit = lipschitz_audit(sampler, np.array([0.0, 0.0]), np.array([0.6, 0.8]),
                            n_z=10_000, rng=rng)
    print(f"{name:30s} K_hat={audit.k_hat:6.3f}  fitted W2={audit.w2_fitted:6.3f}  "
          f"bound slack={audit.bound_slack:+.4f} (+/- {2 * audit.w2_stderr:.4f})")

print("\nslack must be nonnegative up to Monte Carlo error; the translation "
      "cases sit exactly at zero")
