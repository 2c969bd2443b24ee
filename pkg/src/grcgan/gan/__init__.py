from .config import (
    ConditionEncoding,
    ExactFD,
    GanConfig,
    GaussianIso,
    Ratio,
    SphereSurface,
    VanillaBCE,
    WassersteinGP,
)
from .losses import discriminator_loss, generator_loss
from .penalties import (
    condition_jacobian_penalty,
    condition_ratio_penalty,
    fd_jacobian_penalty,
    generator_condition_map,
    ratio_penalty,
)
from .samplers import (
    interpolate_conditions,
    sample_interpolated_conditions,
    sample_perturbation,
)
from .train import TrainingDiverged, TrainingLog, TrainResult, generate, train

__all__ = [
    "ConditionEncoding",
    "ExactFD",
    "GanConfig",
    "GaussianIso",
    "Ratio",
    "SphereSurface",
    "VanillaBCE",
    "WassersteinGP",
    "discriminator_loss",
    "generator_loss",
    "condition_jacobian_penalty",
    "condition_ratio_penalty",
    "fd_jacobian_penalty",
    "generator_condition_map",
    "ratio_penalty",
    "interpolate_conditions",
    "sample_interpolated_conditions",
    "sample_perturbation",
    "TrainingDiverged",
    "TrainingLog",
    "TrainResult",
    "generate",
    "train",
]
