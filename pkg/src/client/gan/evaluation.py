"""Sample-quality metrics for mixture experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.ndimage import maximum_filter
from scipy.spatial.distance import cdist

from src.client.gan.mixture import MixtureSpec
from src.framework.core.exceptions import ConfigError

FloatArray = NDArray[np.float64]

MIN_MODE_SHARE = 0.01


def mode_coverage(
    samples: ArrayLike, spec: MixtureSpec, threshold: float | None = None
) -> tuple[int, float]:
    """Count covered modes and the high-quality sample fraction.

    A mode is covered when at least 1% of the samples lie within
    ``threshold`` (default three component standard deviations) of its mean.

    Returns:
        (covered_count, high_quality_fraction); (0, 0.0) for no samples.
    """
    limit = 3.0 * spec.std if threshold is None else threshold
    if not limit > 0:
        raise ConfigError("coverage threshold must be positive", field="threshold")
    points = np.asarray(samples, dtype=np.float64)
    if points.size == 0:
        return 0, 0.0
    within = cdist(points, spec.means()) <= limit
    shares = within.mean(axis=0)
    covered = int(np.count_nonzero(shares >= MIN_MODE_SHARE))
    high_quality = float(within.any(axis=1).mean())
    return covered, high_quality


@dataclass(frozen=True)
class KdeGrid:
    """Gaussian KDE on a regular grid, normalized to unit mass.

    ``density[i, j]`` is the value at (xs[j], ys[i]).
    """

    xs: FloatArray
    ys: FloatArray
    density: FloatArray

    @property
    def cell_area(self) -> float:
        return float((self.xs[1] - self.xs[0]) * (self.ys[1] - self.ys[0]))

    def mass(self) -> float:
        return float(self.density.sum() * self.cell_area)

    def local_maxima(self, rel_height: float = 0.05) -> FloatArray:
        """Grid coordinates of strict-ish local maxima above a relative height."""
        peaks = (maximum_filter(self.density, size=3, mode="nearest") == self.density) & (
            self.density >= rel_height * self.density.max()
        )
        rows, cols = np.nonzero(peaks)
        return np.stack([self.xs[cols], self.ys[rows]], axis=1)


def kde_grid(
    samples: ArrayLike,
    bandwidth: float,
    grid_size: int = 100,
    bounds: tuple[float, float, float, float] = (-3.0, 3.0, -3.0, 3.0),
) -> KdeGrid:
    """Evaluate a fixed-bandwidth Gaussian KDE on a grid_size x grid_size box.

    Args:
        samples: N x 2 points.
        bandwidth: Kernel standard deviation.
        grid_size: Points per axis.
        bounds: (xmin, xmax, ymin, ymax).

    Returns:
        Densities with sum * cell area = 1.
    """
    if not bandwidth > 0:
        raise ConfigError("bandwidth must be positive", field="bandwidth")
    points = np.asarray(samples, dtype=np.float64)
    xmin, xmax, ymin, ymax = bounds
    xs = np.linspace(xmin, xmax, grid_size)
    ys = np.linspace(ymin, ymax, grid_size)
    # separable Gaussian: density = Ey @ Ex^T
    ex = np.exp(-((xs[:, None] - points[None, :, 0]) ** 2) / (2.0 * bandwidth**2))
    ey = np.exp(-((ys[:, None] - points[None, :, 1]) ** 2) / (2.0 * bandwidth**2))
    raw = ey @ ex.T
    cell_area = (xs[1] - xs[0]) * (ys[1] - ys[0])
    total = raw.sum() * cell_area
    if not total > 0:
        density = np.full_like(raw, 1.0 / (raw.size * cell_area))
    else:
        density = raw / total
    return KdeGrid(xs=xs, ys=ys, density=density)
