"""
Scalar Gegenbauer (ultraspherical) polynomials C_w^lam.

Negative degrees evaluate to zero, so formulas that reference C_{w-1} and
C_{w-2} work unchanged at w = 0, 1.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ParameterError


def _check(w: int, lam: float) -> None:
    if isinstance(w, bool) or int(w) != w:
        raise ParameterError(f"Gegenbauer degree must be an integer, got {w!r}")
    if w < -2:
        raise ParameterError(f"Gegenbauer degree must be >= -2, got {w}")
    if not lam > 0:
        raise ParameterError(f"Gegenbauer parameter must be positive, got {lam}")


def gegenbauer(w: int, lam: float, x: ArrayLike) -> float | NDArray[np.float64]:
    """
    C_w^lam(x) by forward recursion

        w C_w = 2 (w + lam - 1) x C_{w-1} - (w + 2 lam - 2) C_{w-2},

    with C_0 = 1 and C_1 = 2 lam x. Accepts scalars or arrays.
    """
    _check(w, lam)
    x = np.asarray(x, dtype=float)

    if w < 0:
        out = np.zeros_like(x)
    elif w == 0:
        out = np.ones_like(x)
    else:
        prev, cur = np.ones_like(x), 2.0 * lam * x
        for k in range(2, w + 1):
            prev, cur = cur, (2.0 * (k + lam - 1) * x * cur - (k + 2 * lam - 2) * prev) / k
        out = cur

    return float(out) if out.ndim == 0 else out


def gegenbauer_coeffs(w: int, lam: float) -> NDArray[np.float64]:
    """
    Power-basis coefficients of C_w^lam, lowest degree first (length w + 1;
    empty for negative w).

    Uses the coefficient recursion of the same three-term relation; each
    coefficient is a sum of same-sign terms, so no cancellation occurs.
    """
    _check(w, lam)

    if w < 0:
        return np.zeros(0)

    prev = np.zeros(w + 1)
    cur = np.zeros(w + 1)
    cur[0] = 1.0
    if w == 0:
        return cur

    prev, cur = cur, np.zeros(w + 1)
    cur[1] = 2.0 * lam

    for k in range(2, w + 1):
        nxt = np.zeros(w + 1)
        nxt[1:] = 2.0 * (k + lam - 1) * cur[:-1]
        nxt -= (k + 2 * lam - 2) * prev
        prev, cur = cur, nxt / k

    return cur
