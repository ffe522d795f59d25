"""Adversarial training on a ring of Gaussians."""

from src.client.gan.evaluation import kde_grid, mode_coverage
from src.client.gan.losses import loss_D, loss_D_stabilized, loss_G
from src.client.gan.mixture import MixtureSpec, sample_mixture
from src.client.gan.trainer import TrainConfig, TrainRun, instability_indicators, train

__all__ = [
    "kde_grid",
    "mode_coverage",
    "loss_D",
    "loss_D_stabilized",
    "loss_G",
    "MixtureSpec",
    "sample_mixture",
    "TrainConfig",
    "TrainRun",
    "instability_indicators",
    "train",
]
