"""
The 2x2 matrix weight

    W(x) = (1 - x^2)^(n/2 - 1) [[p x^2 + n - p, -n x], [-n x, (n - p) x^2 + p]]

and its closed-form derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError
from .linalg import Mat2
from .matpoly import MatPoly, Params


def _check_domain(x: NDArray[np.float64]) -> None:
    if np.any(np.abs(x) > 1.0):
        raise DomainError(f"Weight is defined on [-1, 1], got x outside it: {x[np.abs(x) > 1.0]}")


@dataclass(frozen=True)
class Weight:
    params: Params

    @cached_property
    def poly(self) -> MatPoly:
        """The quadratic matrix factor P(x)."""
        n, p = self.params.n, self.params.p
        return MatPoly.from_power(
            [
                [[n - p, 0.0], [0.0, p]],
                [[0.0, -n], [-n, 0.0]],
                [[p, 0.0], [0.0, n - p]],
            ]
        )

    def factor(self, x: ArrayLike) -> NDArray[np.float64]:
        """(1 - x^2)^beta; infinite at the endpoints when beta < 0."""
        x = np.asarray(x, dtype=float)
        _check_domain(x)
        with np.errstate(divide="ignore"):
            return np.power(1.0 - x * x, self.params.beta)

    def log_derivative(self, x: ArrayLike) -> NDArray[np.float64]:
        """u = phi'/phi = -2 beta x / (1 - x^2), on the open interval."""
        x = np.asarray(x, dtype=float)
        return -2.0 * self.params.beta * x / (1.0 - x * x)

    def log_derivative_prime(self, x: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        return -2.0 * self.params.beta * (1.0 + x * x) / (1.0 - x * x) ** 2

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        """W(x), shape x.shape + (2, 2)."""
        x = np.asarray(x, dtype=float)
        phi = self.factor(x)
        if np.any(np.isinf(phi)):
            raise DomainError(
                f"Weight is unbounded at the endpoints for n={self.params.n} < 2"
            )
        return phi[..., None, None] * self.poly(x)

    def derivative(self, x: ArrayLike) -> NDArray[np.float64]:
        """W'(x) = phi (u P + P'), on the open interval."""
        x = np.asarray(x, dtype=float)
        _check_domain(x)
        phi = self.factor(x)
        u = self.log_derivative(x)
        return phi[..., None, None] * (
            u[..., None, None] * self.poly(x) + self.poly.deriv()(x)
        )


def weight_eval(params: Params, x: ArrayLike) -> Mat2:
    return Weight(params)(x)


def weight_det(params: Params, x: ArrayLike) -> NDArray[np.float64]:
    """Closed form det W(x) = p (n - p) (1 - x^2)^n."""
    x = np.asarray(x, dtype=float)
    _check_domain(x)
    return params.p * (params.n - params.p) * (1.0 - x * x) ** params.n
