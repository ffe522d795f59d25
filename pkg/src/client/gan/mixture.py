"""Ring-shaped Gaussian mixture used as training data."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveFloat, PositiveInt

from src.framework.core.exceptions import ConfigError


class MixtureSpec(BaseModel):
    """k equal-weight isotropic components with means on a circle.

    ``component_std`` defaults to 2% of the radius.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    k: PositiveInt = 8
    radius: PositiveFloat = 2.0
    component_std: NonNegativeFloat | None = None

    @property
    def dim(self) -> int:
        return 2

    @property
    def std(self) -> float:
        return 0.02 * self.radius if self.component_std is None else self.component_std

    def means(self) -> NDArray[np.float64]:
        angles = 2.0 * np.pi * np.arange(self.k) / self.k
        return self.radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def sample_mixture(
    spec: MixtureSpec,
    n: int,
    rng: np.random.Generator,
    return_labels: bool = False,
) -> NDArray[np.float64] | tuple[NDArray[np.float64], NDArray[np.int_]]:
    """Draw ``n`` points: a uniform component, then Gaussian noise around its mean."""
    if n < 1:
        raise ConfigError("n must be at least 1", field="n")
    labels = rng.integers(0, spec.k, size=n)
    noise = rng.standard_normal((n, 2))
    points = spec.means()[labels] + spec.std * noise
    if return_labels:
        return points, labels
    return points
