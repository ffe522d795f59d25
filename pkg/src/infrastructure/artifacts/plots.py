"""SVG figures rendered with matplotlib's Agg backend.

``svg.hashsalt`` is pinned and metadata dates are dropped so figures are
byte-identical across reruns.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from numpy.typing import ArrayLike  # noqa: E402

from src.client.gan.evaluation import KdeGrid  # noqa: E402
from src.framework.core.kernels import KernelSpec, radial_profile  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "flowlab"
_METADATA = {"Date": None}


def _save(fig: plt.Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_METADATA)
    plt.close(fig)
    return path


def radial_profiles(
    kernels: Sequence[KernelSpec], path: Path, r_max: float = 6.0, dim: int = 2
) -> Path:
    """Radial curves e(r) with the zero line dashed."""
    r = np.linspace(0.0, r_max, 400)
    fig, ax = plt.subplots(figsize=(5, 4))
    for k in kernels:
        ax.plot(r, radial_profile(k, r, dim), label=k.label())
    ax.axhline(0.0, linestyle="--", color="gray", linewidth=0.8)
    ax.set_xlabel("r")
    ax.set_ylabel("e(r)")
    ax.legend(fontsize=7)
    return _save(fig, path)


def spectrum_curves(
    xi: ArrayLike, analytic: ArrayLike, oracle: ArrayLike | None, path: Path, title: str
) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogx(xi, analytic, label="analytic")
    if oracle is not None:
        ax.semilogx(xi, oracle, linestyle=":", label="oracle")
    ax.axhline(0.0, linestyle="--", color="gray", linewidth=0.8)
    ax.set_xlabel("|xi|")
    ax.set_ylabel("F(e)")
    ax.set_title(title, fontsize=8)
    ax.legend()
    return _save(fig, path)


def energy_curve(times: ArrayLike, energies: ArrayLike, path: Path, title: str) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(times, energies)
    ax.set_xlabel("t")
    ax.set_ylabel("empirical distance")
    ax.set_title(title, fontsize=8)
    return _save(fig, path)


def scatter_overlay(real: ArrayLike, generated: ArrayLike, path: Path, title: str = "") -> Path:
    """Data in blue, generated samples in red."""
    real_arr, gen_arr = np.asarray(real), np.asarray(generated)
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.scatter(real_arr[:, 0], real_arr[:, 1], s=2, c="blue", label="data")
    ax.scatter(gen_arr[:, 0], gen_arr[:, 1], s=2, c="red", label="generated")
    ax.set_aspect("equal")
    ax.set_title(title, fontsize=8)
    ax.legend(fontsize=7, loc="upper right")
    return _save(fig, path)


def kde_heatmap(grid: KdeGrid, path: Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.imshow(
        grid.density,
        origin="lower",
        extent=(grid.xs[0], grid.xs[-1], grid.ys[0], grid.ys[-1]),
        cmap="viridis",
    )
    ax.set_title(title, fontsize=8)
    return _save(fig, path)


def growth_fit(
    xi: ArrayLike, predicted: ArrayLike, measured: ArrayLike, path: Path, title: str
) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(xi, predicted, label="predicted")
    ax.plot(xi, measured, linestyle="none", marker=".", markersize=2, label="measured")
    ax.axhline(0.0, linestyle="--", color="gray", linewidth=0.8)
    ax.set_xlabel("xi (table units)")
    ax.set_ylabel("growth rate")
    ax.set_title(title, fontsize=8)
    ax.legend()
    return _save(fig, path)
