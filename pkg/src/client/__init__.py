"""Client layer - the mixture experiment built on the engine."""

from src.client.gan.trainer import TrainConfig, TrainRun, train

__all__ = ["TrainConfig", "TrainRun", "train"]
