"""Minimal dense networks and their optimizer."""

from src.framework.nn.adam import AdamState, adam_step
from src.framework.nn.mlp import MlpModel, backward, forward

__all__ = ["AdamState", "adam_step", "MlpModel", "backward", "forward"]
