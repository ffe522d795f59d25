"""Adam optimizer over name-keyed parameter dictionaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import structlog
from numpy.typing import NDArray

from src.framework.core.exceptions import ConfigError, ShapeMismatchError

logger = structlog.get_logger(__name__)

Params = dict[str, NDArray[np.float64]]


@dataclass
class AdamState:
    """Bias-corrected Adam moments for one parameter set.

    Attributes:
        lr: Step size.
        beta1: First-moment decay.
        beta2: Second-moment decay.
        eps_div: Denominator guard.
        m: First-moment accumulators, shaped like the parameters.
        v: Second-moment accumulators.
        step_count: Updates applied so far.
    """

    lr: float = 5e-3
    beta1: float = 0.5
    beta2: float = 0.9
    eps_div: float = 1e-8
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)
    step_count: int = 0

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ConfigError("lr must be positive", field="lr")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ConfigError("betas must lie in (0, 1)", field="betas")

    @classmethod
    def for_params(
        cls,
        params: Params,
        lr: float = 5e-3,
        betas: tuple[float, float] = (0.5, 0.9),
        eps_div: float = 1e-8,
    ) -> AdamState:
        """Zero-initialized state matching ``params``."""
        return cls(
            lr=lr,
            beta1=betas[0],
            beta2=betas[1],
            eps_div=eps_div,
            m={name: np.zeros_like(p) for name, p in params.items()},
            v={name: np.zeros_like(p) for name, p in params.items()},
        )


def adam_step(state: AdamState, params: Params, grads: Params, maximize: bool = False) -> Params:
    """Apply one Adam update in place.

    Args:
        state: Optimizer state, advanced by one step once every gradient is
            checked against its parameter.
        params: Parameters to update (arrays replaced in the dict).
        grads: Gradients keyed like ``params``.
        maximize: Ascend instead of descend; identical to minimizing -grads.

    Returns:
        The updated parameter dictionary.
    """
    for name, p in params.items():
        g = grads.get(name)
        if g is None or g.shape != p.shape:
            got = () if g is None else g.shape
            raise ShapeMismatchError(f"gradient shape mismatch for {name}", p.shape, got)
    state.step_count += 1
    bc1 = 1.0 - state.beta1**state.step_count
    bc2 = 1.0 - state.beta2**state.step_count
    for name, p in params.items():
        g = grads[name]
        if maximize:
            g = -g
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        state.m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        state.v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * (g * g)
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        params[name] = p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps_div)
    return params
