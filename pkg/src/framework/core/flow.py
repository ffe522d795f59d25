"""Particle dynamics of the shared generator/discriminator flow.

Generated particles move under

    F_i = s * (2 mean_y grad_x e(X_i, y) - 2 mean_{j != i} grad_x e(X_i, X_j))

with s = +1 in the generator direction (descent of the empirical distance)
and s = -1 in the discriminator direction. Real particles never move.

The linearized grid simulation evolves a density perturbation v on a
periodic 1-D grid under dv/dt = s * 2 C0 Laplacian(e * v); every discrete
Fourier mode evolves independently as v_hat <- v_hat * (1 + dt * omega).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveFloat, PositiveInt

from src.framework.core.exceptions import (
    ConfigError,
    DivergedError,
    NonFiniteError,
    ShapeMismatchError,
)
from src.framework.core.kernels import Direction, KernelSpec, grad_sum, pairwise
from src.framework.core.spectral import (
    DEFAULT_GRID_POINTS,
    FourierConvention,
    default_half_width,
    oracle_ft,
)

logger = structlog.get_logger(__name__)

FloatArray = NDArray[np.float64]

DIVERGENCE_THRESHOLD = 1e12
RESOLVED_OMEGA_DT = 0.1
# below this a step changes the amplitude by less than rounding can resolve
MIN_OMEGA_DT = 1e-9


@dataclass
class ParticleSystem:
    """Real-feature and generated-feature point clouds in d dimensions."""

    real_points: FloatArray
    gen_points: FloatArray

    def __post_init__(self) -> None:
        self.real_points = _as_cloud(self.real_points, "real_points")
        self.gen_points = _as_cloud(self.gen_points, "gen_points")
        if self.real_points.shape[1] != self.gen_points.shape[1]:
            raise ShapeMismatchError(
                "real and generated clouds differ in dimension",
                expected=(None, self.real_points.shape[1]),
                actual=self.gen_points.shape,
            )

    @property
    def dim(self) -> int:
        return int(self.real_points.shape[1])

    def with_gen(self, gen_points: ArrayLike) -> ParticleSystem:
        return ParticleSystem(self.real_points, np.asarray(gen_points, dtype=np.float64))


def _as_cloud(points: ArrayLike, name: str) -> FloatArray:
    arr = np.array(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ShapeMismatchError(f"{name} must be a nonempty N x d array", (None, None), arr.shape)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} has non-finite coordinates", quantity=name)
    return arr


class FlowConfig(BaseModel):
    """Settings of one explicit-Euler particle flow.

    ``dt`` defaults to 1e-2 times the squared kernel length scale. Zero is
    accepted and leaves the particles in place.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kernel: KernelSpec
    direction: Direction = Direction.GENERATOR
    dt: NonNegativeFloat | None = None
    steps: PositiveInt = 100
    record_every: PositiveInt = 1
    strict: bool = False
    divergence_threshold: PositiveFloat = DIVERGENCE_THRESHOLD

    def resolved_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        scale = self.kernel.length_scale() or 1.0
        return 1e-2 * scale**2


# --- energies and forces ---------------------------------------------------------


def _self_mean(k: KernelSpec, points: FloatArray, strict: bool) -> float:
    n = points.shape[0]
    if n < 2:
        return 0.0
    return float(pairwise(k, points, points, exclude_diagonal=True, strict=strict).sum()) / (
        n * (n - 1)
    )


def empirical_distance(
    sys: ParticleSystem,
    k: KernelSpec,
    matched_pairs: bool = False,
    strict: bool = False,
) -> float:
    """Particle estimate of the distance between the two clouds.

    Self-energy terms exclude i = j pairs. With ``matched_pairs`` the cross
    term also excludes the pairs (real_i, gen_i), so two identical clouds
    score exactly zero.

    Args:
        sys: Point clouds.
        k: Kernel description.
        matched_pairs: Exclude index-matched cross pairs (equal-size clouds).
        strict: Raise on singular pairs instead of clamping.

    Returns:
        -2 mean(cross) + mean(real self) + mean(gen self).
    """
    real, gen = sys.real_points, sys.gen_points
    if matched_pairs:
        if real.shape != gen.shape:
            raise ShapeMismatchError("matched pairs need equal-size clouds", real.shape, gen.shape)
        n = real.shape[0]
        cross = (
            float(pairwise(k, real, gen, exclude_diagonal=True, strict=strict).sum())
            / (n * (n - 1))
            if n > 1
            else 0.0
        )
    else:
        cross = float(pairwise(k, real, gen, strict=strict).mean())
    return -2.0 * cross + _self_mean(k, real, strict) + _self_mean(k, gen, strict)


def forces(
    sys: ParticleSystem, k: KernelSpec, direction: Direction, strict: bool = False
) -> FloatArray:
    """Force on every generated particle, one row per particle."""
    real, gen = sys.real_points, sys.gen_points
    attraction = grad_sum(k, gen, real, strict=strict) / real.shape[0]
    n = gen.shape[0]
    if n > 1:
        repulsion = grad_sum(k, gen, gen, exclude_diagonal=True, strict=strict) / (n - 1)
    else:
        repulsion = np.zeros_like(gen)
    return direction.sign * (2.0 * attraction - 2.0 * repulsion)


def force_on(
    sys: ParticleSystem, k: KernelSpec, direction: Direction, i: int, strict: bool = False
) -> FloatArray:
    """Force on generated particle ``i``."""
    gen = sys.gen_points
    if not 0 <= i < gen.shape[0]:
        raise IndexError(f"generated particle index {i} out of range")
    point = gen[i : i + 1]
    attraction = grad_sum(k, point, sys.real_points, strict=strict)[0] / sys.real_points.shape[0]
    others = np.delete(gen, i, axis=0)
    if others.shape[0]:
        repulsion = grad_sum(k, point, others, strict=strict)[0] / others.shape[0]
    else:
        repulsion = np.zeros(sys.dim)
    return direction.sign * (2.0 * attraction - 2.0 * repulsion)


# --- explicit Euler flow ---------------------------------------------------------


@dataclass
class Snapshot:
    """Recorded state of the generated cloud."""

    step: int
    t: float
    gen_points: FloatArray
    energy: float


@dataclass
class Trajectory:
    """Recorded history of one particle flow."""

    direction: Direction
    dt: float
    snapshots: list[Snapshot] = field(default_factory=list)
    diverged: bool = False
    diverged_at: int | None = None
    diverged_max_abs: float | None = None

    @property
    def times(self) -> FloatArray:
        return np.array([s.t for s in self.snapshots])

    @property
    def energies(self) -> FloatArray:
        return np.array([s.energy for s in self.snapshots])

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    def energy_increments(self) -> FloatArray:
        return np.diff(self.energies)

    def max_energy_increase(self) -> float:
        steps = self.energy_increments()
        return float(steps.max()) if steps.size else 0.0

    def max_energy_decrease(self) -> float:
        steps = self.energy_increments()
        return float(-steps.min()) if steps.size else 0.0

    def raise_for_divergence(self) -> None:
        """Raise DivergedError if the run was stopped by divergence."""
        if self.diverged:
            raise DivergedError(
                f"{self.direction.value} flow diverged at step {self.diverged_at}",
                step=self.diverged_at or 0,
                max_abs=self.diverged_max_abs if self.diverged_max_abs is not None else np.inf,
            )

    def summary(self) -> dict[str, object]:
        return {
            "direction": self.direction.value,
            "dt": self.dt,
            "records": len(self.snapshots),
            "initial_energy": float(self.snapshots[0].energy),
            "final_energy": float(self.final.energy),
            "max_energy_increase": self.max_energy_increase(),
            "max_energy_decrease": self.max_energy_decrease(),
            "diverged": self.diverged,
            "diverged_at": self.diverged_at,
        }


def _energy_or_nan(sys: ParticleSystem, gen: FloatArray, k: KernelSpec) -> float:
    try:
        return empirical_distance(sys.with_gen(gen), k)
    except NonFiniteError:
        return float("nan")


def simulate(sys: ParticleSystem, cfg: FlowConfig) -> Trajectory:
    """Synchronous explicit-Euler particle flow.

    Divergence (a coordinate beyond the threshold, or a non-finite one)
    stops the run and is flagged on the trajectory; it is an expected
    outcome in unstable directions, not an error.
    """
    k = cfg.kernel
    dt = cfg.resolved_dt()
    log = logger.bind(direction=cfg.direction.value, kernel=k.label(), dt=dt)
    traj = Trajectory(direction=cfg.direction, dt=dt)
    gen = sys.gen_points.copy()
    current = sys.with_gen(gen)
    traj.snapshots.append(Snapshot(0, 0.0, gen.copy(), empirical_distance(current, k)))
    for step in range(1, cfg.steps + 1):
        gen = gen + dt * forces(current, k, cfg.direction, cfg.strict)
        max_abs = float(np.max(np.abs(gen))) if np.all(np.isfinite(gen)) else float("inf")
        if max_abs > cfg.divergence_threshold:
            traj.diverged = True
            traj.diverged_at = step
            traj.diverged_max_abs = max_abs
            energy = _energy_or_nan(sys, gen, k)
            traj.snapshots.append(Snapshot(step, step * dt, gen.copy(), energy))
            log.warning("flow_diverged", step=step, max_abs=max_abs)
            break
        current = sys.with_gen(gen)
        if step % cfg.record_every == 0 or step == cfg.steps:
            traj.snapshots.append(
                Snapshot(step, step * dt, gen.copy(), empirical_distance(current, k))
            )
    log.info(
        "flow_completed",
        records=len(traj.snapshots),
        final_energy=traj.final.energy,
        diverged=traj.diverged,
    )
    return traj


# --- linearized grid perturbations -------------------------------------------------


@dataclass
class GridPerturbation:
    """Density perturbation on a periodic 1-D grid around a constant background.

    Attributes:
        grid_values: M samples of v, M a power of two.
        background_C0: Local constant background density.
        kernel: Kernel driving the flow.
        half_width: Half the periodic domain length (default: twenty kernel scales).
    """

    grid_values: FloatArray
    background_C0: float
    kernel: KernelSpec
    half_width: float | None = None

    def __post_init__(self) -> None:
        self.grid_values = np.asarray(self.grid_values, dtype=np.float64)
        m = self.grid_values.size
        if self.grid_values.ndim != 1 or m < 2 or m & (m - 1):
            raise ConfigError("grid perturbation needs a power-of-two point count", "grid_points")
        if self.background_C0 < 0:
            raise ConfigError("background density must be non-negative", "background_C0")
        if self.half_width is None:
            self.half_width = default_half_width(self.kernel)

    @property
    def grid_points(self) -> int:
        return int(self.grid_values.size)

    @property
    def mean(self) -> float:
        return float(self.grid_values.mean())

    @property
    def coordinates(self) -> FloatArray:
        h = 2.0 * float(self.half_width) / self.grid_points  # type: ignore[arg-type]
        return -float(self.half_width) + h * np.arange(self.grid_points)  # type: ignore[arg-type]

    @classmethod
    def single_mode(
        cls,
        kernel: KernelSpec,
        mode: int = 1,
        amplitude: float = 1e-3,
        background_C0: float = 1.0,
        grid_points: int = DEFAULT_GRID_POINTS,
        half_width: float | None = None,
    ) -> GridPerturbation:
        """A cosine perturbation exciting exactly one discrete mode."""
        width = half_width if half_width is not None else default_half_width(kernel)
        x = np.arange(grid_points) / grid_points
        values = amplitude * np.cos(2.0 * np.pi * mode * x)
        return cls(values, background_C0, kernel, width)

    @classmethod
    def white_noise(
        cls,
        kernel: KernelSpec,
        rng: np.random.Generator,
        amplitude: float = 1e-3,
        background_C0: float = 1.0,
        grid_points: int = DEFAULT_GRID_POINTS,
        half_width: float | None = None,
    ) -> GridPerturbation:
        values = amplitude * rng.standard_normal(grid_points)
        return cls(values, background_C0, kernel, half_width)


@dataclass
class GrowthFit:
    """Predicted and measured per-mode exponents of a linearized run.

    ``predicted`` is the continuous rate omega; ``recursion`` is the exact
    per-step rate ln|1 + dt omega| / dt of the explicit update.
    """

    xi_cycles: FloatArray
    xi_table: FloatArray
    predicted: FloatArray
    recursion: FloatArray
    measured: FloatArray
    excited: NDArray[np.bool_]
    dt: float

    @property
    def resolved(self) -> NDArray[np.bool_]:
        return (
            self.excited
            & (self.xi_cycles > 0)
            & (np.abs(self.predicted) * self.dt > MIN_OMEGA_DT)
            & (np.abs(self.predicted) * self.dt < RESOLVED_OMEGA_DT)
        )

    @property
    def rel_err(self) -> FloatArray:
        out = np.full_like(self.predicted, np.nan)
        mask = self.excited & (self.predicted != 0)
        diff = np.abs(self.measured[mask] - self.predicted[mask])
        out[mask] = diff / np.abs(self.predicted[mask])
        return out

    @property
    def rel_err_recursion(self) -> FloatArray:
        out = np.full_like(self.predicted, np.nan)
        mask = self.excited & (self.recursion != 0)
        diff = np.abs(self.measured[mask] - self.recursion[mask])
        out[mask] = diff / np.abs(self.recursion[mask])
        return out

    def max_rel_err(self) -> float:
        mask = self.resolved
        return float(np.max(self.rel_err[mask])) if np.any(mask) else 0.0


@dataclass
class LinearizedRun:
    """Amplitude history of every mode plus the fitted exponents."""

    times: FloatArray
    amplitudes: FloatArray
    final_values: FloatArray
    mean: float
    fit: GrowthFit
    direction: Direction


def _fit_exponents(
    times: FloatArray, amplitudes: FloatArray, excited: NDArray[np.bool_]
) -> FloatArray:
    measured = np.full(amplitudes.shape[1], np.nan)
    if times.size < 2:
        return measured
    logs = np.log(amplitudes[:, excited])
    tc = times - times.mean()
    measured[excited] = tc @ (logs - logs.mean(axis=0)) / (tc @ tc)
    return measured


def linearized_sim(
    p: GridPerturbation,
    direction: Direction,
    dt: float | None = None,
    steps: int = 1000,
    record_every: int = 1,
    convention: FourierConvention | None = None,
) -> LinearizedRun:
    """Evolve a grid perturbation mode by mode and fit growth exponents.

    Args:
        p: Initial perturbation.
        direction: Flow direction.
        dt: Step size; defaults to 1e-3 / max|omega|.
        steps: Number of explicit steps.
        record_every: Amplitude recording stride.
        convention: Frequency mapping used to report table frequencies.

    Returns:
        The run with per-mode amplitude history and fitted exponents.

    Raises:
        GridTooCoarseError: As for the spectral oracle.
    """
    if steps < 1 or record_every < 1:
        raise ConfigError("steps and record_every must be positive", "steps")
    convention = convention or FourierConvention()
    spectrum = oracle_ft(p.kernel, p.half_width, p.grid_points)
    xi = spectrum.xi_cycles
    omega = -direction.sign * 2.0 * p.background_C0 * (2.0 * np.pi * xi) ** 2 * spectrum.values
    peak = float(np.max(np.abs(omega)))
    if dt is None:
        dt = 1e-3 / peak if peak > 0 else 1e-3
    if dt <= 0:
        raise ConfigError("dt must be positive", "dt")
    log = logger.bind(direction=direction.value, kernel=p.kernel.label(), dt=dt)
    if peak * dt >= 2.0:
        log.warning("linearized_step_unstable", max_omega_dt=peak * dt)

    factor = 1.0 + dt * omega
    v_hat = np.fft.rfft(p.grid_values)
    initial = np.abs(v_hat)
    excited = initial > 1e-12 * float(initial.max()) if initial.max() > 0 else initial > 0
    times = [0.0]
    history = [initial.copy()]
    for step in range(1, steps + 1):
        v_hat = v_hat * factor
        if step % record_every == 0 or step == steps:
            times.append(step * dt)
            history.append(np.abs(v_hat))
    times_arr = np.array(times)
    amplitudes = np.array(history)
    excited = excited & np.all(amplitudes > 0, axis=0)

    with np.errstate(divide="ignore"):
        recursion = np.log(np.abs(factor)) / dt
    fit = GrowthFit(
        xi_cycles=xi,
        xi_table=convention.to_table(xi),
        predicted=omega,
        recursion=recursion,
        measured=_fit_exponents(times_arr, amplitudes, excited),
        excited=excited,
        dt=dt,
    )
    log.info("linearized_completed", steps=steps, max_rel_err=fit.max_rel_err())
    return LinearizedRun(
        times=times_arr,
        amplitudes=amplitudes,
        final_values=np.fft.irfft(v_hat, n=p.grid_points),
        mean=p.mean,
        fit=fit,
        direction=direction,
    )
