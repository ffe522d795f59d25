"""Kernels, spectra and particle flows."""

from src.framework.core.exceptions import (
    ConfigError,
    DivergedError,
    FlowLabException,
    GridTooCoarseError,
    NonFiniteError,
    SingularPairError,
    StabilizerInvalidError,
)
from src.framework.core.flow import (
    FlowConfig,
    GridPerturbation,
    ParticleSystem,
    Trajectory,
    empirical_distance,
    forces,
    linearized_sim,
    simulate,
)
from src.framework.core.kernels import (
    Cramer,
    Direction,
    Elastic,
    GaussianRbf,
    KernelSpec,
    RationalQuadratic,
    RescaledGaussian,
    RescaledRq,
    Stabilized,
    Sum,
)
from src.framework.core.metrics import RunClock, Stage
from src.framework.core.spectral import (
    SpectrumReport,
    StabilizerSolution,
    Verdict,
    analytic_ft,
    growth_rate,
    minimal_epsilon,
    oracle_ft,
    spectrum_report,
)

__all__ = [
    "ConfigError",
    "DivergedError",
    "FlowLabException",
    "GridTooCoarseError",
    "NonFiniteError",
    "SingularPairError",
    "StabilizerInvalidError",
    "FlowConfig",
    "GridPerturbation",
    "ParticleSystem",
    "Trajectory",
    "empirical_distance",
    "forces",
    "linearized_sim",
    "simulate",
    "Cramer",
    "Direction",
    "Elastic",
    "GaussianRbf",
    "KernelSpec",
    "RationalQuadratic",
    "RescaledGaussian",
    "RescaledRq",
    "Stabilized",
    "Sum",
    "RunClock",
    "Stage",
    "SpectrumReport",
    "StabilizerSolution",
    "Verdict",
    "analytic_ft",
    "growth_rate",
    "minimal_epsilon",
    "oracle_ft",
    "spectrum_report",
]
