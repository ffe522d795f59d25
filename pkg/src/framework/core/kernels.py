"""Particle-based distance kernels.

Every kernel is an immutable pydantic model describing a pair potential
e(x, y). All of them are radial except Cramer, which adds the unary terms
||x - z0|| + ||y - z0|| to the radial part -||x - y||. The radial part is
described by two callables on separations r:

    profile(r)       e(r)
    slope_over_r(r)  e'(r) / r   (finite at r = 0 for smooth kernels)

from which values, closed-form gradients and vectorized pairwise sums follow.
Sums and stabilized differences distribute linearly over both.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from enum import Enum
from typing import Annotated, Literal, Union

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, TypeAdapter
from scipy.spatial.distance import cdist

from src.framework.core.exceptions import (
    NonFiniteError,
    ShapeMismatchError,
    SingularPairError,
)

logger = structlog.get_logger(__name__)

FloatArray = NDArray[np.float64]

DEFAULT_R_MIN = 1e-12


class KernelKind(str, Enum):
    """Kernel variants, with the names used by the inline kernel grammar."""

    GAUSSIAN = "gaussian"
    RATIONAL_QUADRATIC = "rq"
    CRAMER = "cramer"
    ELASTIC = "elastic"
    RESCALED_GAUSSIAN = "rgaussian"
    RESCALED_RQ = "rrq"
    SUM = "sum"
    STABILIZED = "stab"


class Direction(str, Enum):
    """Sign of the shared flow: descent for the generator, ascent for the discriminator."""

    GENERATOR = "generator"
    DISCRIMINATOR = "discriminator"

    @property
    def sign(self) -> int:
        return 1 if self is Direction.GENERATOR else -1


def _fmt(value: float) -> str:
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


class KernelBase(BaseModel, ABC):
    """Common behaviour of all kernel variants."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    @abstractmethod
    def profile(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        """Radial part e(r)."""

    @abstractmethod
    def slope_over_r(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        """Radial derivative divided by r, e'(r) / r."""

    @abstractmethod
    def label(self) -> str:
        """Inline grammar form of this kernel."""

    def scales(self) -> tuple[float, ...]:
        """Characteristic lengths of every member; empty for scale-free kernels."""
        return ()

    def length_scale(self) -> float | None:
        """Smallest characteristic length, or None for scale-free kernels."""
        found = self.scales()
        return min(found) if found else None

    def unary(self, points: FloatArray) -> FloatArray | None:
        """Per-point term added for each argument (Cramer only)."""
        return None

    def unary_grad(self, points: FloatArray) -> FloatArray | None:
        return None


class GaussianRbf(KernelBase):
    """exp(-r^2 / (2 sigma^2))."""

    kind: Literal["gaussian"] = "gaussian"
    sigma: PositiveFloat

    def profile(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        return np.exp(-(r**2) / (2.0 * self.sigma**2))

    def slope_over_r(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        return -self.profile(r, dim) / self.sigma**2

    def scales(self) -> tuple[float, ...]:
        return (self.sigma,)

    def label(self) -> str:
        return f"gaussian:sigma={_fmt(self.sigma)}"


class RescaledGaussian(GaussianRbf):
    """(1/sigma) exp(-r^2 / (2 sigma^2)), the stabilizer-friendly normalisation."""

    kind: Literal["rgaussian"] = "rgaussian"  # type: ignore[assignment]

    def profile(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        return super().profile(r, dim) / self.sigma

    def label(self) -> str:
        return f"rgaussian:sigma={_fmt(self.sigma)}"


class RationalQuadratic(KernelBase):
    """(1 + r^2 / (2 alpha))^(-alpha)."""

    kind: Literal["rq"] = "rq"
    alpha: PositiveFloat

    def profile(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        return (1.0 + r**2 / (2.0 * self.alpha)) ** (-self.alpha)

    def slope_over_r(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        return -((1.0 + r**2 / (2.0 * self.alpha)) ** (-self.alpha - 1.0))

    def scales(self) -> tuple[float, ...]:
        return (float(np.sqrt(2.0 * self.alpha)),)

    def label(self) -> str:
        return f"rq:alpha={_fmt(self.alpha)}"


class RescaledRq(RationalQuadratic):
    """alpha (1 + r^2 / (2 alpha))^(-alpha)."""

    kind: Literal["rrq"] = "rrq"  # type: ignore[assignment]

    def profile(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        return self.alpha * super().profile(r, dim)

    def slope_over_r(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        return self.alpha * super().slope_over_r(r, dim)

    def label(self) -> str:
        return f"rrq:alpha={_fmt(self.alpha)}"


class Cramer(KernelBase):
    """||x - z0|| + ||y - z0|| - ||x - y||.

    An empty ``z0`` means the origin of whatever dimension the points have.
    Undefined unit vectors (x = y or x = z0) contribute zero to the gradient.
    """

    kind: Literal["cramer"] = "cramer"
    z0: tuple[float, ...] = ()

    def _anchor(self, points: FloatArray) -> FloatArray:
        dim = points.shape[-1]
        if not self.z0:
            return np.zeros(dim)
        if len(self.z0) != dim:
            raise ShapeMismatchError(
                "Cramer anchor dimension does not match points",
                expected=(len(self.z0),),
                actual=(dim,),
            )
        return np.asarray(self.z0, dtype=np.float64)

    def profile(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        return -r

    def slope_over_r(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        out = np.zeros_like(r)
        np.divide(-1.0, r, out=out, where=r > 0)
        return out

    def unary(self, points: FloatArray) -> FloatArray | None:
        return np.linalg.norm(points - self._anchor(points), axis=-1)

    def unary_grad(self, points: FloatArray) -> FloatArray | None:
        offset = points - self._anchor(points)
        norm = np.linalg.norm(offset, axis=-1, keepdims=True)
        out = np.zeros_like(offset)
        np.divide(offset, norm, out=out, where=norm > 0)
        return out

    def label(self) -> str:
        if not self.z0:
            return "cramer"
        return "cramer:z0=" + "|".join(_fmt(c) for c in self.z0)


class Elastic(KernelBase):
    """1 / r^m, with m defaulting to n - 1 for ambient dimension n.

    When the resolved exponent is 0 (one dimension) the kernel is the
    logarithmic potential -ln r. Separations below ``r_min`` are clamped,
    or rejected in strict mode.
    """

    kind: Literal["elastic"] = "elastic"
    exponent: PositiveFloat | None = None
    r_min: PositiveFloat = DEFAULT_R_MIN

    def resolved_exponent(self, dim: int) -> float:
        return float(dim - 1) if self.exponent is None else self.exponent

    def _clamped(self, r: FloatArray, strict: bool) -> FloatArray:
        if strict and np.any(r < self.r_min):
            separation = float(np.min(r))
            raise SingularPairError(
                f"Elastic kernel evaluated at separation {separation:.3e}",
                separation=separation,
                floor=self.r_min,
            )
        return np.maximum(r, self.r_min)

    def profile(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        rc = self._clamped(r, strict)
        m = self.resolved_exponent(dim)
        if m == 0.0:
            return -np.log(rc)
        return rc ** (-m)

    def slope_over_r(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        rc = self._clamped(r, strict)
        m = self.resolved_exponent(dim)
        if m == 0.0:
            return -(rc**-2.0)
        return -m * rc ** (-m - 2.0)

    def label(self) -> str:
        if self.exponent is None:
            return "elastic"
        return f"elastic:exponent={_fmt(self.exponent)}"


class WeightedKernel(BaseModel):
    """One member of a kernel sum."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    weight: PositiveFloat = 1.0
    kernel: KernelSpec


class Sum(KernelBase):
    """Weighted sum of kernels."""

    kind: Literal["sum"] = "sum"
    terms: tuple[WeightedKernel, ...] = Field(min_length=1)

    def profile(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        parts = [t.weight * t.kernel.profile(r, dim, strict) for t in self.terms]
        return np.sum(parts, axis=0)

    def slope_over_r(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        parts = [t.weight * t.kernel.slope_over_r(r, dim, strict) for t in self.terms]
        return np.sum(parts, axis=0)

    def scales(self) -> tuple[float, ...]:
        return tuple(s for t in self.terms for s in t.kernel.scales())

    def unary(self, points: FloatArray) -> FloatArray | None:
        return _combine([(t.weight, t.kernel.unary(points)) for t in self.terms])

    def unary_grad(self, points: FloatArray) -> FloatArray | None:
        return _combine([(t.weight, t.kernel.unary_grad(points)) for t in self.terms])

    def label(self) -> str:
        parts = [
            t.kernel.label() if t.weight == 1.0 else f"{_fmt(t.weight)}*{t.kernel.label()}"
            for t in self.terms
        ]
        return "sum[" + ";".join(parts) + "]"

    @classmethod
    def of(cls, *kernels: KernelSpec, weights: tuple[float, ...] | None = None) -> Sum:
        weights = weights or tuple(1.0 for _ in kernels)
        terms = tuple(WeightedKernel(weight=w, kernel=k) for w, k in zip(weights, kernels))
        return cls(terms=terms)


class Stabilized(KernelBase):
    """base - epsilon * stabilizer."""

    kind: Literal["stab"] = "stab"
    base: KernelSpec
    stabilizer: KernelSpec
    epsilon: PositiveFloat

    def profile(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        return self.base.profile(r, dim, strict) - self.epsilon * self.stabilizer.profile(
            r, dim, strict
        )

    def slope_over_r(self, r: FloatArray, dim: int, strict: bool = False) -> FloatArray:
        return self.base.slope_over_r(r, dim, strict) - self.epsilon * self.stabilizer.slope_over_r(
            r, dim, strict
        )

    def scales(self) -> tuple[float, ...]:
        return self.base.scales() + self.stabilizer.scales()

    def unary(self, points: FloatArray) -> FloatArray | None:
        return _combine(
            [(1.0, self.base.unary(points)), (-self.epsilon, self.stabilizer.unary(points))]
        )

    def unary_grad(self, points: FloatArray) -> FloatArray | None:
        return _combine(
            [
                (1.0, self.base.unary_grad(points)),
                (-self.epsilon, self.stabilizer.unary_grad(points)),
            ]
        )

    def label(self) -> str:
        return f"stab[{self.base.label()};{self.stabilizer.label()};{_fmt(self.epsilon)}]"


KernelSpec = Annotated[
    Union[
        GaussianRbf,
        RescaledGaussian,
        RationalQuadratic,
        RescaledRq,
        Cramer,
        Elastic,
        Sum,
        Stabilized,
    ],
    Field(discriminator="kind"),
]

WeightedKernel.model_rebuild()
Sum.model_rebuild()
Stabilized.model_rebuild()

kernel_adapter: TypeAdapter[KernelSpec] = TypeAdapter(KernelSpec)


def _combine(parts: list[tuple[float, FloatArray | None]]) -> FloatArray | None:
    present = [(w, a) for w, a in parts if a is not None]
    if not present:
        return None
    return sum(w * a for w, a in present)  # type: ignore[return-value]


def _as_points(value: ArrayLike) -> FloatArray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr


def _check_finite(values: FloatArray, quantity: str) -> FloatArray:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"non-finite {quantity}", quantity=quantity)
    return values


# --- scalar API -------------------------------------------------------------


def evaluate(k: KernelSpec, x: ArrayLike, y: ArrayLike, strict: bool = False) -> float:
    """Evaluate e(x, y).

    Args:
        k: Kernel description.
        x: First point.
        y: Second point.
        strict: Raise SingularPairError instead of clamping singular separations.

    Returns:
        The kernel value.
    """
    xa, ya = _as_points(x), _as_points(y)
    if xa.shape != ya.shape:
        raise ShapeMismatchError("points differ in dimension", expected=xa.shape, actual=ya.shape)
    r = np.array(np.linalg.norm(xa - ya))
    value = float(k.profile(r, xa.shape[-1], strict))
    both = np.stack([xa, ya])
    unary = k.unary(both)
    if unary is not None:
        value += float(unary.sum())
    return float(_check_finite(np.array(value), "kernel value"))


def grad(k: KernelSpec, x: ArrayLike, y: ArrayLike, strict: bool = False) -> FloatArray:
    """Closed-form gradient of e(x, y) with respect to x."""
    xa, ya = _as_points(x), _as_points(y)
    if xa.shape != ya.shape:
        raise ShapeMismatchError("points differ in dimension", expected=xa.shape, actual=ya.shape)
    diff = xa - ya
    r = np.array(np.linalg.norm(diff))
    g = k.slope_over_r(r, xa.shape[-1], strict) * diff
    unary = k.unary_grad(xa[None, :])
    if unary is not None:
        g = g + unary[0]
    return _check_finite(np.asarray(g, dtype=np.float64), "kernel gradient")


def radial_profile(k: KernelSpec, r: ArrayLike, dim: int = 1, strict: bool = False) -> FloatArray:
    """Radial part e(r) on separations r (Cramer gives -r)."""
    ra = np.asarray(r, dtype=np.float64)
    return k.profile(ra, dim, strict)


def length_scale(k: KernelSpec) -> float | None:
    return k.length_scale()


def interaction_sign(k: KernelSpec, r: ArrayLike, dim: int = 1) -> NDArray[np.int_]:
    """+1 where the pair interaction is attractive, -1 where it is repulsive.

    Follows the molecular-dynamics reading of the potential: positive
    energy attracts, negative energy repels.
    """
    return np.sign(radial_profile(k, r, dim)).astype(int)


# --- vectorized API ---------------------------------------------------------


def _separations(p: FloatArray, q: FloatArray, exclude_diagonal: bool) -> FloatArray:
    if p.ndim != 2 or q.ndim != 2 or p.shape[1] != q.shape[1]:
        raise ShapeMismatchError(
            "point clouds must be 2-D arrays of equal width",
            expected=(None, p.shape[-1]),
            actual=q.shape,
        )
    dist = cdist(p, q)
    if exclude_diagonal:
        np.fill_diagonal(dist, 1.0)
    return dist


def pairwise(
    k: KernelSpec,
    p: ArrayLike,
    q: ArrayLike,
    exclude_diagonal: bool = False,
    strict: bool = False,
) -> FloatArray:
    """Matrix of e(p_i, q_j); the diagonal is zeroed when excluded."""
    pa, qa = np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64)
    dist = _separations(pa, qa, exclude_diagonal)
    values = k.profile(dist, pa.shape[1], strict)
    up, uq = k.unary(pa), k.unary(qa)
    if up is not None and uq is not None:
        values = values + up[:, None] + uq[None, :]
    if exclude_diagonal:
        np.fill_diagonal(values, 0.0)
    return _check_finite(values, "pairwise energy")


def grad_sum(
    k: KernelSpec,
    p: ArrayLike,
    q: ArrayLike,
    exclude_diagonal: bool = False,
    strict: bool = False,
) -> FloatArray:
    """Row sums of gradients, sum_j grad_x e(p_i, q_j), one row per p_i."""
    pa, qa = np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64)
    dist = _separations(pa, qa, exclude_diagonal)
    s = k.slope_over_r(dist, pa.shape[1], strict)
    if exclude_diagonal:
        np.fill_diagonal(s, 0.0)
    out = pa * s.sum(axis=1, keepdims=True) - s @ qa
    ug = k.unary_grad(pa)
    if ug is not None:
        count = qa.shape[0] - 1 if exclude_diagonal else qa.shape[0]
        out = out + count * ug
    return _check_finite(out, "pairwise gradient")
