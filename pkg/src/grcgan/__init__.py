"""Conditional GAN training with a Lipschitz penalty on the generator's
condition input, plus the synthetic benchmarks and metrics used to study it.

The package is organized as a small numpy library:

- :mod:`grcgan.tensor`, :mod:`grcgan.nn`, :mod:`grcgan.optim`: a dense-network
  engine with reverse-mode autodiff and Adam.
- :mod:`grcgan.gan`: adversarial losses, the condition-Lipschitz penalties,
  interpolation/perturbation samplers, and the training loop.
- :mod:`grcgan.datasets`: circular 2-D Gaussians (full and gapped) and a
  conditional multivariate Gaussian with its exact conditional law.
- :mod:`grcgan.metrics`: Gaussian fitting, closed-form 2-Wasserstein distance,
  quality/mode-recovery rates, and the conditional-Lipschitz audit.
- :mod:`grcgan.experiments`, :mod:`grcgan.cli`: seeded, manifest-driven
  reproduction of the benchmark studies.
"""

from .datasets import (
    CircularSpec,
    GaussianSpec,
    LabeledDataset,
    MvnSpec,
    circular_labels,
    make_mvn_params,
    sample_circular,
    sample_mvn,
    true_conditional,
)
from .gan import (
    ConditionEncoding,
    ExactFD,
    GanConfig,
    GaussianIso,
    Ratio,
    SphereSurface,
    TrainingLog,
    VanillaBCE,
    WassersteinGP,
    generate,
    train,
)
from .metrics import (
    ExperimentReport,
    LipschitzAudit,
    empirical_w2,
    evaluate_circular,
    evaluate_mvn,
    gaussian_fit,
    high_quality_fraction,
    lipschitz_audit,
    matrix_sqrt_psd,
    recovered_modes,
    w2_gaussians,
)
from .nn import (
    MlpSpec,
    LayerSpec,
    Network,
    circular_discriminator_spec,
    circular_generator_spec,
    load_checkpoint,
    mvn_discriminator_spec,
    mvn_generator_spec,
    save_checkpoint,
)
from .optim import Adam, AdamParams
from .tensor import Tensor, backward

__version__ = "0.1.0"
