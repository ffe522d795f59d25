"""Adversarial training loop for the mixture experiment."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import structlog
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, PositiveInt
from scipy.spatial.distance import pdist

from src.client.gan.evaluation import mode_coverage
from src.client.gan.losses import LossResult, loss_D, loss_D_stabilized, loss_G
from src.client.gan.mixture import MixtureSpec, sample_mixture
from src.framework.core.exceptions import FlowLabException, NonFiniteError
from src.framework.core.flow import ParticleSystem, empirical_distance
from src.framework.core.kernels import KernelSpec, RescaledGaussian, Sum
from src.framework.core.spectral import StabilizerSolution, minimal_epsilon
from src.framework.nn.adam import AdamState, adam_step
from src.framework.nn.mlp import MlpModel

logger = structlog.get_logger(__name__)

FloatArray = NDArray[np.float64]


def default_loss_kernel() -> KernelSpec:
    return Sum.of(*(RescaledGaussian(sigma=s) for s in (4.0, 8.0, 16.0)))


def default_stabilizer() -> KernelSpec:
    return Sum.of(*(RescaledGaussian(sigma=s) for s in (1.0, float(np.sqrt(2.0)), 2.0)))


class TrainConfig(BaseModel):
    """Hyperparameters of one adversarial run.

    ``stabilizer`` set to None trains with the plain discriminator loss.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kernel_D: KernelSpec = Field(default_factory=default_loss_kernel)
    stabilizer: KernelSpec | None = Field(default_factory=default_stabilizer)
    epsilon: NonNegativeFloat = 1.0
    lr: PositiveFloat = 5e-3
    betas: tuple[float, float] = (0.5, 0.9)
    epochs: PositiveInt = 3000
    batch_size: PositiveInt = 256
    n_critic: PositiveInt = 1
    steps_per_epoch: PositiveInt = 1
    latent_dim: PositiveInt = 2
    d_dims: tuple[int, ...] = (2, 100, 50, 16)
    g_hidden: tuple[int, ...] = (100, 50)
    slope: float = 0.2
    use_bias: bool = True
    eval_size: PositiveInt = 2000
    metric_subsample: PositiveInt = 500
    eval_every: PositiveInt = 1
    seed: int = 0

    @property
    def stabilized(self) -> bool:
        return self.stabilizer is not None and self.epsilon > 0

    @property
    def g_dims(self) -> tuple[int, ...]:
        return (self.latent_dim, *self.g_hidden, 2)


@dataclass
class EpochRecord:
    epoch: int
    loss_G: float
    loss_D: float
    feature_distance: float
    mode_coverage: int
    high_quality_fraction: float

    def as_row(self) -> dict[str, Any]:
        return {
            "epoch": self.epoch,
            "loss_G": self.loss_G,
            "loss_D": self.loss_D,
            "feature_distance": self.feature_distance,
            "mode_coverage": self.mode_coverage,
            "high_quality_fraction": self.high_quality_fraction,
        }


@dataclass
class TrainRun:
    """Per-epoch metrics and final models of one run."""

    config: TrainConfig
    mixture: MixtureSpec
    records: list[EpochRecord] = field(default_factory=list)
    generator: MlpModel | None = None
    discriminator: MlpModel | None = None
    diverged: bool = False
    diverged_epoch: int | None = None
    feature_spread_ratio: float = float("nan")
    epsilon_report: StabilizerSolution | None = None
    final_samples: FloatArray | None = None
    eval_real: FloatArray | None = None

    def rows(self) -> list[dict[str, Any]]:
        return [r.as_row() for r in self.records]

    @property
    def final_coverage(self) -> int:
        finite = [r for r in self.records if r.mode_coverage >= 0]
        return finite[-1].mode_coverage if finite else 0

    @property
    def final_high_quality(self) -> float:
        finite = [r for r in self.records if np.isfinite(r.high_quality_fraction)]
        return finite[-1].high_quality_fraction if finite else 0.0

    def _distances(self) -> FloatArray:
        return np.array([r.feature_distance for r in self.records], dtype=np.float64)

    def oscillation_amplitude(self) -> float:
        """Half the peak-to-peak feature distance over the last quarter of epochs."""
        values = self._distances()
        tail = values[len(values) - max(1, len(values) // 4) :]
        tail = tail[np.isfinite(tail)]
        if tail.size == 0:
            return float("inf")
        return float(tail.max() - tail.min()) / 2.0

    def settled_amplitude(self) -> float:
        """Half the peak-to-peak feature distance over the second quarter of epochs.

        Infinite when that window holds fewer than two evaluated epochs.
        """
        values = self._distances()
        n = len(values)
        window = values[n // 4 : n // 2]
        window = window[np.isfinite(window)]
        if window.size < 2:
            return float("inf")
        return float(window.max() - window.min()) / 2.0

    def summary(self) -> dict[str, Any]:
        return {
            "epochs_completed": len(self.records),
            "final_mode_coverage": self.final_coverage,
            "final_high_quality_fraction": self.final_high_quality,
            "oscillation_amplitude": self.oscillation_amplitude(),
            "feature_spread_ratio": self.feature_spread_ratio,
            "diverged": self.diverged,
            "diverged_epoch": self.diverged_epoch,
            "epsilon_min": self.epsilon_report.epsilon_min if self.epsilon_report else None,
            "epsilon_margin": self.epsilon_report.margin if self.epsilon_report else None,
        }


def feature_spread_ratio(D: MlpModel, real: FloatArray) -> float:
    """Mean pairwise feature distance of real samples over the feature diameter."""
    features = D.forward(real)
    if features.shape[0] < 2:
        return float("nan")
    distances = pdist(features)
    diameter = float(distances.max())
    if diameter == 0:
        return 0.0
    return float(distances.mean()) / diameter


def instability_indicators(
    run: TrainRun,
    reference: TrainRun | None = None,
    hq_threshold: float = 0.75,
    oscillation_factor: float = 10.0,
) -> list[str]:
    """Names of the instability signatures a run exhibits.

    The late oscillation amplitude is compared with ``reference`` when given,
    otherwise with the run's own second quarter of epochs.
    """
    found: list[str] = []
    if run.diverged:
        found.append("non_finite_loss")
    if run.final_coverage < run.mixture.k:
        found.append("mode_coverage_below_k")
    if run.final_high_quality < hq_threshold:
        found.append("high_quality_below_threshold")
    if reference is not None:
        ref_amp = reference.oscillation_amplitude()
    else:
        ref_amp = run.settled_amplitude()
    if run.oscillation_amplitude() > oscillation_factor * ref_amp:
        found.append("distance_oscillation")
    return found


def _discriminator_step(
    cfg: TrainConfig, D: MlpModel, G: MlpModel, x: FloatArray, z: FloatArray
) -> LossResult:
    if cfg.stabilized:
        assert cfg.stabilizer is not None
        return loss_D_stabilized(D, G, x, z, cfg.kernel_D, cfg.stabilizer, cfg.epsilon)
    return loss_D(D, G, x, z, cfg.kernel_D)


def _epsilon_report(cfg: TrainConfig) -> StabilizerSolution | None:
    if cfg.stabilizer is None:
        return None
    try:
        return minimal_epsilon(cfg.kernel_D, cfg.stabilizer)
    except FlowLabException as exc:
        logger.warning("epsilon_report_unavailable", error=str(exc))
        return None


def train(cfg: TrainConfig, spec: MixtureSpec | None = None) -> TrainRun:
    """Alternate discriminator ascent and generator descent.

    Each generator step is preceded by ``n_critic`` discriminator steps;
    every step draws fresh data and latent batches. Metrics are measured on
    a fixed evaluation draw. A non-finite loss halts the run and the partial
    record is returned.
    """
    spec = spec or MixtureSpec()
    init_ss, data_ss, latent_ss, eval_ss = np.random.SeedSequence(cfg.seed).spawn(4)
    init_rng = np.random.default_rng(init_ss)
    data_rng = np.random.default_rng(data_ss)
    latent_rng = np.random.default_rng(latent_ss)
    eval_rng = np.random.default_rng(eval_ss)

    D = MlpModel.init(list(cfg.d_dims), init_rng, cfg.slope, cfg.use_bias)
    G = MlpModel.init(list(cfg.g_dims), init_rng, cfg.slope, cfg.use_bias)
    opt_d = AdamState.for_params(D.params, cfg.lr, cfg.betas)
    opt_g = AdamState.for_params(G.params, cfg.lr, cfg.betas)

    eval_real = sample_mixture(spec, cfg.eval_size, eval_rng)
    assert isinstance(eval_real, np.ndarray)
    eval_latent = eval_rng.standard_normal((cfg.eval_size, cfg.latent_dim))
    m = min(cfg.metric_subsample, cfg.eval_size)

    run = TrainRun(config=cfg, mixture=spec, eval_real=eval_real)
    run.epsilon_report = _epsilon_report(cfg)
    log = logger.bind(seed=cfg.seed, stabilized=cfg.stabilized)
    log.info("training_started", epochs=cfg.epochs, batch_size=cfg.batch_size)

    def draw() -> tuple[FloatArray, FloatArray]:
        x = sample_mixture(spec, cfg.batch_size, data_rng)
        z = latent_rng.standard_normal((cfg.batch_size, cfg.latent_dim))
        return x, z  # type: ignore[return-value]

    def run_epoch() -> tuple[float, float, bool]:
        d_value = g_value = float("nan")
        for _ in range(cfg.steps_per_epoch):
            for _ in range(cfg.n_critic):
                x, z = draw()
                d_res = _discriminator_step(cfg, D, G, x, z)
                d_value = d_res.value
                if not d_res.finite:
                    return d_value, g_value, False
                adam_step(opt_d, D.params, d_res.grads, maximize=True)
            x, z = draw()
            g_res = loss_G(D, G, x, z, cfg.kernel_D)
            g_value = g_res.value
            if not g_res.finite:
                return d_value, g_value, False
            adam_step(opt_g, G.params, g_res.grads)
        return d_value, g_value, True

    def evaluate(epoch: int, d_value: float, g_value: float) -> EpochRecord:
        fake = G.forward(eval_latent)
        covered, hq = mode_coverage(fake, spec)
        system = ParticleSystem(D.forward(eval_real[:m]), D.forward(fake[:m]))
        distance = empirical_distance(system, cfg.kernel_D)
        return EpochRecord(epoch, g_value, d_value, distance, covered, hq)

    for epoch in range(1, cfg.epochs + 1):
        d_value = g_value = float("nan")
        reason = "non-finite loss"
        try:
            d_value, g_value, finite = run_epoch()
            if finite and (epoch % cfg.eval_every == 0 or epoch == cfg.epochs):
                record = evaluate(epoch, d_value, g_value)
            elif finite:
                record = EpochRecord(epoch, g_value, d_value, float("nan"), -1, float("nan"))
        except NonFiniteError as exc:
            finite = False
            reason = str(exc)

        if not finite:
            run.diverged = True
            run.diverged_epoch = epoch
            run.records.append(EpochRecord(epoch, g_value, d_value, float("nan"), -1, float("nan")))
            log.warning(
                "training_diverged", epoch=epoch, loss_D=d_value, loss_G=g_value, reason=reason
            )
            break

        run.records.append(record)
        if epoch % max(1, cfg.epochs // 10) == 0:
            log.info(
                "epoch_completed",
                epoch=epoch,
                loss_D=d_value,
                loss_G=g_value,
                mode_coverage=record.mode_coverage,
            )

    run.generator, run.discriminator = G, D
    if not run.diverged:
        run.final_samples = G.forward(eval_latent)
        run.feature_spread_ratio = feature_spread_ratio(D, eval_real[:m])
    log.info("training_finished", **run.summary())
    return run
