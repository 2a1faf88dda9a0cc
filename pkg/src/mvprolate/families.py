"""
The monic family R_w, its orthonormal version Q_w = ||R_w||^-1 R_w, norms,
three-term recursions and the Christoffel-Darboux identity.

R_w is built three ways:

- `monic_rw`: the monic recursion x R_w = A_w R_{w-1} + B_w R_w + R_{w+1},
  run in the Chebyshev basis (canonical, used downstream);
- `explicit_power_coeffs`: the closed formula for the power coefficients;
- `gegenbauer_power_coeffs`: the Gegenbauer-polynomial formula.

Norms come from quadrature; the closed-form norm is only a diagnostic.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import gamma, poch

from .errors import ParameterError
from .gegenbauer import gegenbauer_coeffs
from .linalg import Mat2, antidiag2, diag2, frobenius
from .matpoly import MatPoly, Params
from .quadrature import FULL, inner_product

logger = logging.getLogger(__name__)

SAMPLE_GRID = np.linspace(-1.0, 1.0, 32)


def _check_degree(w: int, minimum: int = 0) -> int:
    if isinstance(w, bool) or int(w) != w or w < minimum:
        raise ParameterError(f"Degree must be an integer >= {minimum}, got {w!r}")
    return int(w)


# -----------------------------------------------------------------------------
# 1. RECURSION COEFFICIENTS
# -----------------------------------------------------------------------------


def recursion_matrices(w: int, params: Params) -> tuple[Mat2, Mat2]:
    """(A_w, B_w) of the monic recursion; A_0 = 0."""
    w = _check_degree(w)
    n, p = params.n, params.p

    b = antidiag2(-p / ((p + w) * (p + w + 1)), -(n - p) / ((n - p + w) * (n - p + w + 1)))

    if w == 0:
        return np.zeros((2, 2)), b

    scale = w * (n + w) / ((n + 2 * w - 1) * (p + w) * (n - p + w) * (2 * w + n + 1))
    a = scale * diag2((p + w - 1) * (n - p + w + 1), (p + w + 1) * (n - p + w - 1))
    return a, b


@lru_cache(maxsize=None)
def monic_rw(w: int, params: Params) -> MatPoly:
    """R_w, degree w with leading coefficient exactly I."""
    w = _check_degree(w)

    if w == 0:
        return MatPoly.identity()

    prev = monic_rw(w - 1, params)
    a, b = recursion_matrices(w - 1, params)
    result = prev.mul_x() - prev.mul_left_const(b)
    if w >= 2:
        result = result - monic_rw(w - 2, params).mul_left_const(a)
    return result


def explicit_power_coeffs(w: int, params: Params) -> NDArray[np.float64]:
    """Power coefficients R^w_j, shape (w + 1, 2, 2), from the closed formula."""
    w = _check_degree(w)
    n, p = params.n, params.p
    out = np.zeros((w + 1, 2, 2))

    for k in range(w // 2 + 1):
        poch_k = poch((n + 1) / 2 + w - k, k)
        head = math.factorial(w) / (4**k * math.factorial(k) * math.factorial(w - 2 * k))
        c = (-1) ** k * head / poch_k
        out[w - 2 * k] = c * diag2((p + w - 2 * k) / (p + w), (n - p + w - 2 * k) / (n - p + w))

        if w - 2 * k - 1 >= 0:
            head = math.factorial(w) / (
                4**k * math.factorial(k) * math.factorial(w - 2 * k - 1)
            )
            c = (-1) ** k * head / poch_k
            out[w - 2 * k - 1] = c * antidiag2(1 / (p + w), 1 / (n - p + w))

    return out


def gegenbauer_power_coeffs(w: int, params: Params) -> NDArray[np.float64]:
    """Power coefficients of R_w from its Gegenbauer-polynomial formula."""
    w = _check_degree(w)
    n, p = params.n, params.p
    lam1, lam2 = (n + 1) / 2, (n + 3) / 2

    def padded(k: int, lam: float) -> NDArray[np.float64]:
        c = np.zeros(w + 1)
        if k >= 0:
            c[: k + 1] = gegenbauer_coeffs(k, lam)
        return c

    cw = padded(w, lam1)
    cw1 = padded(w - 1, lam2)
    cw2 = padded(w - 2, lam2)

    out = np.zeros((w + 1, 2, 2))
    out[:, 0, 0] = cw / (n + 1) + cw2 / (p + w)
    out[:, 0, 1] = cw1 / (p + w)
    out[:, 1, 0] = cw1 / (n - p + w)
    out[:, 1, 1] = cw / (n + 1) + cw2 / (n - p + w)

    return out * (math.factorial(w) * (n + 1) / (2.0**w * poch(lam1, w)))


def route_agreement(w: int, params: Params) -> float:
    """
    Max entrywise relative difference between the Gegenbauer and explicit
    power coefficients. Entries that are zero in the explicit formula must
    be exactly zero in the other route, otherwise the result is inf.
    """
    explicit = explicit_power_coeffs(w, params)
    other = gegenbauer_power_coeffs(w, params)

    zero = explicit == 0.0
    if np.any(other[zero] != 0.0):
        return math.inf
    if np.all(zero):
        return 0.0
    return float(np.max(np.abs(other[~zero] - explicit[~zero]) / np.abs(explicit[~zero])))


def recursion_route_distance(w: int, params: Params) -> float:
    """Distance between `monic_rw` and the explicit coefficients, relative to their size."""
    explicit = explicit_power_coeffs(w, params)
    computed = monic_rw(w, params).power_coeffs()
    return float(np.max(np.abs(computed - explicit)) / np.max(np.abs(explicit)))


# -----------------------------------------------------------------------------
# 2. NORMS AND THE ORTHONORMAL FAMILY
# -----------------------------------------------------------------------------


class NormReport(NamedTuple):
    quadrature: Mat2
    closed_form: Mat2
    ratio: NDArray[np.float64]  # quadrature / closed form, per diagonal entry


@lru_cache(maxsize=None)
def _norm_squared(w: int, params: Params) -> Mat2:
    r = monic_rw(w, params)
    value = inner_product(r, r, params, FULL)
    value.setflags(write=False)
    return value


def norm_squared(w: int, params: Params) -> Mat2:
    """<R_w, R_w> on [-1, 1], by quadrature."""
    return np.array(_norm_squared(_check_degree(w), params))


def norm_closed_form(w: int, params: Params) -> Mat2:
    """The closed-form norm expression (a diagnostic; see `norm_ratio_table`)."""
    w = _check_degree(w)
    n, p = params.n, params.p

    scalar = (
        math.sqrt(math.pi)
        * gamma(n / 2 + 1)
        * poch(n + 1, w)
        / (math.factorial(w) * (n + 1) * (n + 2 * w + 1) * gamma(n / 2 + 1.5))
    )
    return scalar * diag2(
        p * (n - p + w + 1) / (p + w), (n - p) * (p + w + 1) / (n - p + w)
    )


def norm_matrix(w: int, params: Params) -> NormReport:
    quad = norm_squared(w, params)
    closed = norm_closed_form(w, params)
    return NormReport(quad, closed, np.diag(quad) / np.diag(closed))


def inverse_norm(w: int, params: Params) -> Mat2:
    """S_w = ||R_w||^-1, the inverse diagonal square root of the norm matrix."""
    return np.diag(1.0 / np.sqrt(np.diag(norm_squared(w, params))))


@lru_cache(maxsize=None)
def orthonormal_qw(w: int, params: Params) -> MatPoly:
    """Q_w = S_w R_w."""
    w = _check_degree(w)
    return monic_rw(w, params).mul_left_const(inverse_norm(w, params))


def orthonormal_recursion(w: int, params: Params) -> tuple[Mat2, Mat2]:
    """
    (A~_w, B~_w) with x Q_w = A~_w Q_{w-1} + B~_w Q_w + A~_{w+1}^T Q_{w+1};
    A~_0 = 0.
    """
    w = _check_degree(w)
    a, b = recursion_matrices(w, params)
    s_w = inverse_norm(w, params)
    b_tilde = s_w @ b @ np.linalg.inv(s_w)

    if w == 0:
        return np.zeros((2, 2)), b_tilde

    a_tilde = s_w @ a @ np.diag(np.sqrt(np.diag(norm_squared(w - 1, params))))
    return a_tilde, b_tilde


# -----------------------------------------------------------------------------
# 3. IDENTITY RESIDUALS
# -----------------------------------------------------------------------------


def recursion_residual(w: int, params: Params) -> float:
    """
    Monic recursion checked on the explicit power coefficients (independent
    of how `monic_rw` is built), relative to the size of R_{w+1}.
    """
    w = _check_degree(w)
    a, b = recursion_matrices(w, params)
    size = w + 2

    def padded(k: int) -> NDArray[np.float64]:
        out = np.zeros((size, 2, 2))
        if k >= 0:
            out[: k + 1] = explicit_power_coeffs(k, params)
        return out

    shifted = np.zeros((size, 2, 2))
    shifted[1:] = padded(w)[:-1]

    residual = shifted - a @ padded(w - 1) - b @ padded(w) - padded(w + 1)
    return float(np.max(np.abs(residual)) / np.max(np.abs(padded(w + 1))))


def recursion_consistency(w: int, params: Params) -> float:
    """
    max of |A_w - ||R_w||^2 ||R_{w-1}||^-2| (relative) and the relative
    asymmetry of B_w ||R_w||^2, with norms by quadrature.
    """
    w = _check_degree(w)
    a, b = recursion_matrices(w, params)
    nw = norm_squared(w, params)

    bn = b @ nw
    asym = frobenius(bn - bn.T) / frobenius(bn)
    if w == 0:
        return asym

    ratio = nw @ np.linalg.inv(norm_squared(w - 1, params))
    return max(asym, frobenius(a - ratio) / frobenius(ratio))


def orthonormal_recursion_residual(w: int, params: Params, x=SAMPLE_GRID) -> float:
    """max over x of ||x Q_w - A~_w Q_{w-1} - B~_w Q_w - A~_{w+1}^T Q_{w+1}||_F."""
    w = _check_degree(w)
    x = np.asarray(x, dtype=float)
    a_w, b_w = orthonormal_recursion(w, params)
    a_next, _ = orthonormal_recursion(w + 1, params)

    q = orthonormal_qw(w, params)(x)
    lhs = x[..., None, None] * q
    rhs = b_w @ q + a_next.T @ orthonormal_qw(w + 1, params)(x)
    if w >= 1:
        rhs = rhs + a_w @ orthonormal_qw(w - 1, params)(x)

    return float(np.max(np.linalg.norm(lhs - rhs, axis=(-2, -1))))


def _christoffel_darboux(w: int, params: Params, y: NDArray, x: NDArray) -> NDArray:
    """
    Residual of

        Q_{w-1}(y)^T A~_w^T Q_w(x) - Q_w(y)^T A~_w Q_{w-1}(x)
          = (x - y) sum_{k<w} Q_k(y)^T Q_k(x)

    for every pair (y_i, x_j), relative to 1 + the size of its terms.
    """
    w = _check_degree(w, minimum=1)
    a_w, _ = orthonormal_recursion(w, params)
    qy = np.stack([orthonormal_qw(k, params)(y) for k in range(w + 1)])
    qx = np.stack([orthonormal_qw(k, params)(x) for k in range(w + 1)])

    first = np.einsum("iba,bc,jcd->ijad", qy[w - 1], a_w.T, qx[w])
    second = np.einsum("iba,bc,jcd->ijad", qy[w], a_w, qx[w - 1])
    terms = np.einsum("kiba,kjbd->kijad", qy[:w], qx[:w])
    gap = (x[None, :] - y[:, None])[:, :, None, None]

    residual = np.linalg.norm(first - second - gap * terms.sum(axis=0), axis=(-2, -1))
    scale = (
        np.linalg.norm(first, axis=(-2, -1))
        + np.linalg.norm(second, axis=(-2, -1))
        + np.abs(gap[:, :, 0, 0]) * np.linalg.norm(terms, axis=(-2, -1)).sum(axis=0)
    )
    return residual / (1.0 + scale)


def christoffel_darboux_residual(w: int, x: float, y: float, params: Params) -> float:
    """Relative Christoffel-Darboux residual at one pair (x, y)."""
    return float(_christoffel_darboux(w, params, np.array([float(y)]), np.array([float(x)]))[0, 0])


def christoffel_darboux_grid(w: int, params: Params, points: int = 32) -> float:
    """Worst relative residual over all pairs of a uniform grid on [-1, 1]."""
    t = np.linspace(-1.0, 1.0, points)
    return float(_christoffel_darboux(w, params, t, t).max())


def gram_deviation(w_max: int, params: Params) -> float:
    """max over w, m <= w_max of ||<Q_w, Q_m> - delta I||_F on [-1, 1]."""
    worst = 0.0
    for w in range(w_max + 1):
        for m in range(w, w_max + 1):
            g = inner_product(orthonormal_qw(w, params), orthonormal_qw(m, params), params, FULL)
            target = np.eye(2) if w == m else np.zeros((2, 2))
            worst = max(worst, frobenius(g - target))
    return worst


def norm_ratio_table(params: Params, w_max: int = 20) -> dict:
    """
    Ratio quadrature / closed-form norm per w and diagonal entry, plus whether
    it is w-independent (relative spread below 1e-8).
    """
    rows = []
    for w in range(w_max + 1):
        ratio = norm_matrix(w, params).ratio
        rows.append({"w": w, "ratio_11": float(ratio[0]), "ratio_22": float(ratio[1])})

    values = np.array([[r["ratio_11"], r["ratio_22"]] for r in rows])
    spread = float((values.max() - values.min()) / abs(values).max())
    logger.info("Norm ratio spread over w <= %d: %.3e", w_max, spread)

    return {"rows": rows, "spread": spread, "w_independent": spread < 1e-8}
