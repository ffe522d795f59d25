"""flowlab: stability analysis of particle-based adversarial training."""

__version__ = "1.0.0"
