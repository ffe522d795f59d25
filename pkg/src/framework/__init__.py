"""Framework layer - the numerical engine."""

from src.framework.core.flow import ParticleSystem, simulate
from src.framework.core.kernels import Direction, KernelSpec
from src.framework.core.spectral import minimal_epsilon, spectrum_report

__all__ = [
    "Direction",
    "KernelSpec",
    "ParticleSystem",
    "simulate",
    "minimal_epsilon",
    "spectrum_report",
]
