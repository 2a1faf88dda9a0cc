"""
Exception hierarchy shared by every mvprolate module.

Errors carry the measured quantity that triggered them (a determinant, an
asymmetry, the last two refinement values) so callers can report it.
"""

from __future__ import annotations

from typing import Any


class MvProlateError(Exception):
    """Base class for all library errors."""

    pass


class ParameterError(MvProlateError, ValueError):
    """A parameter or precondition was violated."""

    pass


class DomainError(MvProlateError, ValueError):
    """An argument lies outside the domain of the operation."""

    pass


class SingularMatrixError(MvProlateError, ArithmeticError):
    """Raised when inverting a (numerically) singular 2x2 block."""

    def __init__(self, det: float, message: str | None = None):
        self.det = det
        super().__init__(message or f"Singular 2x2 matrix (det={det!r})")


class AsymmetryError(MvProlateError, ValueError):
    """Raised when a symmetric solver receives a non-symmetric input."""

    def __init__(self, asymmetry: float, tolerance: float):
        self.asymmetry = asymmetry
        self.tolerance = tolerance
        super().__init__(
            f"Matrix is not symmetric: relative asymmetry {asymmetry:.3e} "
            f"exceeds {tolerance:.1e}"
        )


class ConvergenceError(MvProlateError, ArithmeticError):
    """An iterative procedure exhausted its budget."""

    def __init__(self, message: str, budget: int, last_values: Any = None):
        self.budget = budget
        self.last_values = last_values
        super().__init__(message)


class InvarianceError(MvProlateError, ArithmeticError):
    """The commuting operator leaked out of the band-limited span."""

    def __init__(self, coupling: float, tolerance: float):
        self.coupling = coupling
        self.tolerance = tolerance
        super().__init__(
            f"Coupling Q_N -> Q_(N+1) is {coupling:.3e} (tolerance {tolerance:.1e}); "
            "the operator does not preserve the span"
        )
