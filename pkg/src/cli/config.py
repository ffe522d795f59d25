"""CLI configuration.

``Settings`` holds process-wide defaults read from ``FLOWLAB_*`` environment
variables (and ``.env``). Each command has a run-config model whose fields
are the keys accepted in presets, config files and flags. Values are
layered as defaults < preset < config file < flags.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Annotated, Any, Literal, TypeVar

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.cli.kernel_grammar import parse_kernel
from src.client.gan.mixture import MixtureSpec
from src.client.gan.trainer import TrainConfig, default_loss_kernel, default_stabilizer
from src.framework.core.exceptions import ConfigError
from src.framework.core.kernels import Direction, KernelSpec, Stabilized
from src.utils.preset_loader import KeyValueSource


class Settings(BaseSettings):
    """Process-wide defaults loaded from the environment."""

    model_config = SettingsConfigDict(
        env_prefix="FLOWLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    out_dir: Path = Path("runs")
    seed: int = 0
    presets_path: Path = Path("resources/presets")

    # Logging
    log_level: str = "INFO"
    log_format: Literal["json", "console"] = "console"


@lru_cache
def get_settings() -> Settings:
    return Settings()


_NONE_WORDS = {"", "none", "off", "null"}


def _kernel(value: Any) -> Any:
    if not isinstance(value, str):
        return value
    try:
        return parse_kernel(value)
    except ConfigError as exc:
        raise ValueError(exc.message) from exc


def _kernel_or_none(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() in _NONE_WORDS:
        return None
    return _kernel(value)


ParsedKernel = Annotated[KernelSpec, BeforeValidator(_kernel)]
OptionalKernel = Annotated[KernelSpec | None, BeforeValidator(_kernel_or_none)]


class RunConfig(BaseModel):
    """Fields shared by every command."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = 0
    svg: bool = True


class XiGridConfig(RunConfig):
    xi_min: PositiveFloat = 0.05
    xi_max: PositiveFloat = 50.0
    xi_points: PositiveInt = 512
    dim: PositiveInt = 1

    @model_validator(mode="after")
    def _ordered(self) -> XiGridConfig:
        if self.xi_max <= self.xi_min:
            raise ValueError("xi_max must exceed xi_min")
        return self


class SpectrumRunConfig(XiGridConfig):
    """``spectrum``: one kernel, or every reference row with ``table``."""

    kernel: OptionalKernel = None
    table: bool = False
    c: NonNegativeFloat = 1.0
    oracle: bool = True
    grid_points: PositiveInt = 4096
    half_width: PositiveFloat | None = None

    @model_validator(mode="after")
    def _needs_kernel(self) -> SpectrumRunConfig:
        if self.kernel is None and not self.table:
            raise ValueError("a kernel is required unless table mode is on")
        return self


class FlowRunConfig(RunConfig):
    """``flow``: explicit particle flow between two Gaussian clouds."""

    kernel: ParsedKernel
    direction: Direction = Direction.GENERATOR
    dt: PositiveFloat | None = None
    steps: PositiveInt = 200
    record_every: PositiveInt = 1
    n_real: PositiveInt = 200
    n_gen: PositiveInt = 200
    dim: PositiveInt = 2
    gen_shift: float = 1.5
    gen_scale: PositiveFloat = 0.5
    frame_every: PositiveInt = 50


class PerturbRunConfig(RunConfig):
    """``perturb``: linearized grid run; a stabilizer with epsilon > 0 wraps the kernel."""

    kernel: ParsedKernel
    stabilizer: OptionalKernel = None
    epsilon: NonNegativeFloat = 0.0
    direction: Direction = Direction.DISCRIMINATOR
    c0: NonNegativeFloat = 1.0
    initial: Literal["noise", "single"] = "noise"
    mode: PositiveInt = 1
    amplitude: PositiveFloat = 1e-3
    grid_points: PositiveInt = 4096
    half_width: PositiveFloat | None = None
    dt: PositiveFloat | None = None
    steps: PositiveInt = 1000
    record_every: PositiveInt = 1

    def effective_kernel(self) -> KernelSpec:
        if self.stabilizer is None or self.epsilon == 0:
            return self.kernel
        return Stabilized(base=self.kernel, stabilizer=self.stabilizer, epsilon=self.epsilon)


class TrainRunConfig(RunConfig):
    """``train``: the mixture experiment. ``stabilizer=none`` trains unstabilized."""

    kernel: ParsedKernel = Field(default_factory=default_loss_kernel)
    stabilizer: OptionalKernel = Field(default_factory=default_stabilizer)
    epsilon: NonNegativeFloat = 1.0
    lr: PositiveFloat = 5e-3
    beta1: float = Field(default=0.5, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.9, ge=0.0, lt=1.0)
    epochs: PositiveInt = 3000
    batch_size: PositiveInt = 256
    n_critic: PositiveInt = 1
    steps_per_epoch: PositiveInt = 1
    eval_size: PositiveInt = 2000
    metric_subsample: PositiveInt = 500
    eval_every: PositiveInt = 1
    mixture_k: PositiveInt = 8
    radius: PositiveFloat = 2.0
    component_std: PositiveFloat | None = None
    kde_bandwidth: PositiveFloat = 0.05
    checkpoints: bool = True

    def to_train_config(self) -> TrainConfig:
        return TrainConfig(
            kernel_D=self.kernel,
            stabilizer=self.stabilizer,
            epsilon=self.epsilon,
            lr=self.lr,
            betas=(self.beta1, self.beta2),
            epochs=self.epochs,
            batch_size=self.batch_size,
            n_critic=self.n_critic,
            steps_per_epoch=self.steps_per_epoch,
            eval_size=self.eval_size,
            metric_subsample=self.metric_subsample,
            eval_every=self.eval_every,
            seed=self.seed,
        )

    def mixture(self) -> MixtureSpec:
        return MixtureSpec(k=self.mixture_k, radius=self.radius, component_std=self.component_std)


class EpsilonRunConfig(XiGridConfig):
    """``epsilon``: minimal stabilizing weight of a (base, stabilizer) pair."""

    base: ParsedKernel
    stabilizer: ParsedKernel
    probes: tuple[PositiveFloat, ...] = ()

    @field_validator("probes", mode="before")
    @classmethod
    def _split_probes(cls, value: Any) -> Any:
        if isinstance(value, str):
            return tuple(v for v in (p.strip() for p in value.split(",")) if v)
        return value


RUN_CONFIGS: dict[str, type[RunConfig]] = {
    "spectrum": SpectrumRunConfig,
    "flow": FlowRunConfig,
    "perturb": PerturbRunConfig,
    "train": TrainRunConfig,
    "epsilon": EpsilonRunConfig,
}

C = TypeVar("C", bound=RunConfig)


def build_run_config(
    model: type[C],
    layers: list[KeyValueSource],
    overrides: dict[str, Any],
    defaults: dict[str, Any] | None = None,
) -> C:
    """Merge layered sources and flags into a validated run config.

    Args:
        model: Run-config class of the command.
        layers: Key-value sources in increasing precedence (preset, config file).
        overrides: Flag values, highest precedence; None entries are ignored.
        defaults: Values below every layer (environment settings such as the seed).

    Raises:
        ConfigError: For unknown keys or invalid values, naming the field and,
            when it came from a file, the line.
    """
    values: dict[str, Any] = dict(defaults or {})
    origin: dict[str, tuple[Path, int | None]] = {}
    known = set(model.model_fields)
    for source in layers:
        for key, value in source.values.items():
            line = source.lines.get(key)
            if key not in known:
                raise ConfigError(
                    f"unknown key in {source.path}",
                    field=key,
                    line=line,
                    hint="valid keys: " + ", ".join(sorted(known)),
                )
            values[key] = value
            origin[key] = (source.path, line)
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
            origin.pop(key, None)

    try:
        return model.model_validate(values)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = str(first["loc"][0]) if first["loc"] else None
        path, line = origin.get(field or "", (None, None))
        message = first["msg"] if path is None else f"{first['msg']} in {path}"
        raise ConfigError(message, field=field, line=line) from exc
