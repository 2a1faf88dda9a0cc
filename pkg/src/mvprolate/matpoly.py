"""
Matrix-valued polynomials with 2 columns and 1 or 2 rows.

Coefficients are stored in the Chebyshev basis, shape (d + 1, rows, 2):
power-basis Horner evaluation of degree-20 orthonormal families loses too
many digits. Power-basis views are available through `power_coeffs` and
`MatPoly.from_power`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.polynomial.chebyshev as cheb
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, ParameterError
from .linalg import Mat2


@dataclass(frozen=True)
class Params:
    """The two real parameters of the weight, 0 < p < n."""

    n: float
    p: float

    def __post_init__(self):
        n, p = float(self.n), float(self.p)

        if not (math.isfinite(n) and math.isfinite(p)):
            raise ParameterError(f"Parameters must be finite, got n={n}, p={p}")
        if not 0 < p < n:
            raise ParameterError(f"Parameters must satisfy 0 < p < n, got n={n}, p={p}")

        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)

    @property
    def beta(self) -> float:
        """Exponent of the scalar factor (1 - x^2)^(n/2 - 1)."""
        return self.n / 2 - 1

    @property
    def balanced(self) -> bool:
        """n = 2p, where the 1/(n - 2p) families are undefined."""
        return math.isclose(self.n, 2 * self.p, rel_tol=1e-14, abs_tol=1e-14)


def _cheb_to_power(c: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.zeros_like(c)
    for i in range(c.shape[1]):
        for j in range(c.shape[2]):
            # cheb2poly trims trailing zeros
            converted = cheb.cheb2poly(c[:, i, j])
            out[: converted.size, i, j] = converted
    return out


def _power_to_cheb(c: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.zeros_like(c)
    for i in range(c.shape[1]):
        for j in range(c.shape[2]):
            converted = cheb.poly2cheb(c[:, i, j])
            out[: converted.size, i, j] = converted
    return out


class MatPoly:
    """
    An immutable polynomial with (rows x 2)-matrix coefficients.

    Trailing all-zero blocks are trimmed, so `degree` is exact and the zero
    polynomial has degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: ArrayLike, rows: int | None = None):
        c = np.array(coeffs, dtype=float)

        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3 or c.shape[2] != 2 or c.shape[1] not in (1, 2):
            raise ParameterError(f"MatPoly coefficients must have shape (d+1, 1|2, 2), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise DomainError("MatPoly coefficients must be finite")

        if rows is not None and c.shape[0] == 0:
            c = np.zeros((0, rows, 2))

        nonzero = np.flatnonzero(np.any(c != 0.0, axis=(1, 2)))
        c = c[: nonzero[-1] + 1] if nonzero.size else c[:0]
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("MatPoly is immutable")

    # ---- constructors ----

    @classmethod
    def constant(cls, m: ArrayLike) -> MatPoly:
        return cls(np.asarray(m, dtype=float)[None])

    @classmethod
    def identity(cls) -> MatPoly:
        return cls.constant(np.eye(2))

    @classmethod
    def zero(cls, rows: int = 2) -> MatPoly:
        return cls(np.zeros((0, rows, 2)), rows=rows)

    @classmethod
    def from_power(cls, coeffs: ArrayLike) -> MatPoly:
        """From power-basis blocks, index j = power of x."""
        c = np.array(coeffs, dtype=float)
        if c.ndim == 2:
            c = c[None]
        if c.shape[0] == 0:
            return cls(c, rows=c.shape[1])
        return cls(_power_to_cheb(c))

    @classmethod
    def scalar(cls, power_coeffs: ArrayLike, m: ArrayLike | None = None) -> MatPoly:
        """s(x) * m for a scalar polynomial s given by power coefficients."""
        m = np.eye(2) if m is None else np.asarray(m, dtype=float)
        s = np.asarray(power_coeffs, dtype=float)
        return cls(cheb.poly2cheb(s)[:, None, None] * m[None])

    # ---- structure ----

    @property
    def rows(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def is_zero(self) -> bool:
        return self.degree < 0

    def power_coeffs(self) -> NDArray[np.float64]:
        return _cheb_to_power(np.array(self.coeffs))

    def leading(self) -> NDArray[np.float64]:
        """Power-basis leading coefficient."""
        d = self.degree
        if d < 0:
            return np.zeros((self.rows, 2))
        return self.coeffs[d] * (2.0 ** (d - 1) if d >= 1 else 1.0)

    def coeff_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def distance(self, other: MatPoly) -> float:
        return (self - other).coeff_norm()

    # ---- evaluation ----

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        """Values of shape x.shape + (rows, 2)."""
        x = np.asarray(x, dtype=float)
        if self.is_zero():
            return np.zeros(x.shape + (self.rows, 2))
        values = cheb.chebval(x, self.coeffs, tensor=True)
        return np.moveaxis(values, (0, 1), (-2, -1)) if x.ndim else values

    def deriv(self, order: int = 1) -> MatPoly:
        if self.degree < order:
            return MatPoly.zero(self.rows)
        return MatPoly(cheb.chebder(self.coeffs, m=order, axis=0))

    # ---- arithmetic ----

    def _padded(self, other: MatPoly) -> tuple[NDArray, NDArray]:
        if self.rows != other.rows:
            raise ParameterError(f"Row mismatch: {self.rows} vs {other.rows}")
        size = max(self.coeffs.shape[0], other.coeffs.shape[0])
        a = np.zeros((size, self.rows, 2))
        b = np.zeros((size, self.rows, 2))
        a[: self.coeffs.shape[0]] = self.coeffs
        b[: other.coeffs.shape[0]] = other.coeffs
        return a, b

    def __add__(self, other: MatPoly) -> MatPoly:
        a, b = self._padded(other)
        return MatPoly(a + b, rows=self.rows)

    def __sub__(self, other: MatPoly) -> MatPoly:
        a, b = self._padded(other)
        return MatPoly(a - b, rows=self.rows)

    def __neg__(self) -> MatPoly:
        return MatPoly(-self.coeffs, rows=self.rows)

    def scale(self, s: float) -> MatPoly:
        return MatPoly(float(s) * self.coeffs, rows=self.rows)

    __mul__ = scale
    __rmul__ = scale

    def mul_x(self) -> MatPoly:
        """x * f, using x T_0 = T_1 and x T_j = (T_{j+1} + T_{j-1}) / 2."""
        d = self.degree
        if d < 0:
            return self
        out = np.zeros((d + 2, self.rows, 2))
        out[1] += self.coeffs[0]
        out[2:] += 0.5 * self.coeffs[1:]
        out[:d] += 0.5 * self.coeffs[1:]
        return MatPoly(out)

    def mul_scalar_poly(self, power_coeffs: ArrayLike) -> MatPoly:
        """s(x) * f for a scalar polynomial s (power coefficients)."""
        result = MatPoly.zero(self.rows)
        for s_k in np.asarray(power_coeffs, dtype=float)[::-1]:
            result = result.mul_x() + self.scale(s_k)
        return result

    def mul_right_const(self, m: Mat2) -> MatPoly:
        """f(x) @ m, coefficientwise."""
        return MatPoly(np.einsum("dik,kj->dij", self.coeffs, m), rows=self.rows)

    def mul_left_const(self, m: ArrayLike) -> MatPoly:
        """m @ f(x); m has shape (rows', rows)."""
        m = np.asarray(m, dtype=float)
        return MatPoly(np.einsum("ik,dkj->dij", m, self.coeffs), rows=m.shape[0])

    def __matmul__(self, other: MatPoly) -> MatPoly:
        """Pointwise matrix product f(x) @ g(x); g must be square."""
        if other.rows != 2:
            raise ParameterError("Right factor of a product must be 2x2")
        if self.is_zero() or other.is_zero():
            return MatPoly.zero(self.rows)

        size = self.degree + other.degree + 1
        out = np.zeros((size, self.rows, 2))
        for i in range(self.rows):
            for j in range(2):
                for k in range(2):
                    prod = cheb.chebmul(self.coeffs[:, i, k], other.coeffs[:, k, j])
                    out[: prod.size, i, j] += prod
        return MatPoly(out)

    def __repr__(self):
        return f"MatPoly(degree={self.degree}, rows={self.rows})"
