"""Framework exception definitions.

This module defines the exception hierarchy used throughout flowlab for
numerical failures, unsupported configurations and invalid inputs.
"""

from typing import Any


class FlowLabException(Exception):
    """Base exception for all flowlab errors."""

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        """Initialize the exception.

        Args:
            message: Human-readable error message.
            details: Optional dictionary with additional context.
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}


class SingularPairError(FlowLabException):
    """Raised in strict mode when a singular kernel is evaluated at coincident points."""

    def __init__(
        self,
        message: str,
        separation: float,
        floor: float,
        details: dict[str, Any] | None = None,
    ) -> None:
        """Initialize the singular pair error.

        Args:
            message: Description of the failure.
            separation: Observed distance between the two points.
            floor: Configured minimum separation r_min.
            details: Optional additional context.
        """
        super().__init__(message, details)
        self.separation = separation
        self.floor = floor


class NonFiniteError(FlowLabException):
    """Raised when a computed quantity overflows or becomes NaN."""

    def __init__(
        self, message: str, quantity: str, details: dict[str, Any] | None = None
    ) -> None:
        super().__init__(message, details)
        self.quantity = quantity


class UnsupportedAlphaError(FlowLabException):
    """Raised when no closed-form transform is tabulated for a rational-quadratic alpha."""

    def __init__(
        self, message: str, alpha: float, details: dict[str, Any] | None = None
    ) -> None:
        super().__init__(message, details)
        self.alpha = alpha


class ModeAtZeroError(FlowLabException):
    """Raised when a transform with a pole at the origin is requested at xi = 0.

    The sign of the divergence is carried so callers can still report it.
    """

    def __init__(
        self,
        message: str,
        kernel: str,
        sign: int = 1,
        details: dict[str, Any] | None = None,
    ) -> None:
        """Initialize the mode-at-zero error.

        Args:
            message: Description of the failure.
            kernel: Kernel kind that diverges.
            sign: Sign of the infinite value (+1 or -1).
            details: Optional additional context.
        """
        super().__init__(message, details)
        self.kernel = kernel
        self.sign = sign


class GridTooCoarseError(FlowLabException):
    """Raised when a kernel length scale spans fewer than four grid cells."""

    def __init__(
        self,
        message: str,
        length_scale: float,
        cell_width: float,
        hint: str = "increase --grid-points or reduce --half-width",
        details: dict[str, Any] | None = None,
    ) -> None:
        """Initialize the grid error.

        Args:
            message: Description of the failure.
            length_scale: Kernel length scale.
            cell_width: Grid spacing that was too coarse.
            hint: Remediation shown to CLI users.
            details: Optional additional context.
        """
        super().__init__(message, details)
        self.length_scale = length_scale
        self.cell_width = cell_width
        self.hint = hint


class StabilizerInvalidError(FlowLabException):
    """Raised when a stabilizer transform is not strictly positive on the grid."""

    def __init__(
        self, message: str, xi: float, details: dict[str, Any] | None = None
    ) -> None:
        super().__init__(message, details)
        self.xi = xi


class BesselDomainError(FlowLabException):
    """Raised for K0 arguments outside (0, inf)."""

    def __init__(self, message: str, x: float, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, details)
        self.x = x


class DivergedError(FlowLabException):
    """Raised when a run blows up and the caller asked for a hard failure."""

    def __init__(
        self,
        message: str,
        step: int,
        max_abs: float,
        details: dict[str, Any] | None = None,
    ) -> None:
        """Initialize the divergence error.

        Args:
            message: Description of the failure.
            step: Step (or epoch) at which divergence was detected.
            max_abs: Largest magnitude observed.
            details: Optional additional context.
        """
        super().__init__(message, details)
        self.step = step
        self.max_abs = max_abs


class ShapeMismatchError(FlowLabException):
    """Raised when array shapes do not match a model contract."""

    def __init__(
        self,
        message: str,
        expected: tuple[int | None, ...],
        actual: tuple[int, ...],
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, details)
        self.expected = expected
        self.actual = actual


class ConfigError(FlowLabException):
    """Raised for invalid run configuration (file, preset or flags)."""

    def __init__(
        self,
        message: str,
        field: str | None = None,
        line: int | None = None,
        hint: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        """Initialize the config error.

        Args:
            message: Description of the problem.
            field: Offending field name, when known.
            line: 1-based line in the config file, when known.
            hint: Optional remediation.
            details: Optional additional context.
        """
        super().__init__(message, details)
        self.field = field
        self.line = line
        self.hint = hint

    def __str__(self) -> str:
        location = ""
        if self.line is not None:
            location += f"line {self.line}: "
        if self.field:
            location += f"{self.field}: "
        text = f"{location}{self.message}"
        if self.hint:
            text += f" ({self.hint})"
        return text
