"""Run timing instrumentation.

Provides structured logging for wall-clock stage timings:
- spectrum reports
- particle flows and linearized runs
- adversarial training
"""

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import structlog

logger = structlog.get_logger(__name__)


class Stage(str, Enum):
    """Timed stages, one per command."""

    SPECTRUM = "spectrum"
    FLOW = "flow"
    PERTURB = "perturb"
    TRAIN = "train"
    EPSILON = "epsilon"
    ARTIFACTS = "artifacts"


@dataclass
class StageTiming:
    """A single completed stage."""

    stage: Stage
    value_ms: float
    run_id: str
    metadata: dict[str, Any] = field(default_factory=dict)
    timestamp: float = field(default_factory=time.time)


class RunClock:
    """Named perf-counter timers for one command run.

    Stages over their runtime budget are logged at warning level.
    """

    BUDGET_MS = {
        Stage.SPECTRUM: 10_000.0,
        Stage.EPSILON: 10_000.0,
        Stage.PERTURB: 60_000.0,
        Stage.FLOW: 120_000.0,
        Stage.TRAIN: 1_800_000.0,
    }

    def __init__(self, run_id: str) -> None:
        """Initialize the clock.

        Args:
            run_id: Identifier bound to every log line.
        """
        self.run_id = run_id
        self._logger = structlog.get_logger(__name__).bind(run_id=run_id)
        self._timers: dict[str, float] = {}
        self._started = time.perf_counter()
        self.timings: list[StageTiming] = []

    def start_timer(self, name: str) -> None:
        self._timers[name] = time.perf_counter()

    def stop_timer(self, name: str) -> float:
        """Stop a timer and return elapsed milliseconds (0 if never started)."""
        if name not in self._timers:
            return 0.0
        elapsed = (time.perf_counter() - self._timers[name]) * 1000
        del self._timers[name]
        return elapsed

    def record(self, stage: Stage, value_ms: float, **metadata: Any) -> StageTiming:
        """Store and log a stage timing."""
        timing = StageTiming(stage, value_ms, self.run_id, dict(metadata))
        self.timings.append(timing)
        log_data = {
            "stage": stage.value,
            "value_ms": round(value_ms, 2),
            **metadata,
        }
        budget = self.BUDGET_MS.get(stage)
        if budget is not None and value_ms > budget:
            self._logger.warning("stage_budget_exceeded", budget_ms=budget, **log_data)
        else:
            self._logger.info("stage_timing", **log_data)
        return timing

    def elapsed_seconds(self) -> float:
        """Wall-clock seconds since the clock was created."""
        return time.perf_counter() - self._started
