"""
Right-acting second-order differential operators

    f D = f'' F2 + f' F1 + f F0,

the operator D having R_w as eigenfunctions, the commuting operator D~,
the differentiation formulas of R_w and Q_w, and the symmetry machinery
that checks an operator against the weight on an interval.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from .errors import ParameterError
from .families import (
    inverse_norm,
    monic_rw,
    norm_squared,
    orthonormal_qw,
    orthonormal_recursion,
    recursion_matrices,
)
from .linalg import (
    E11,
    J,
    Mat2,
    antidiag2,
    diag2,
    frobenius,
    mat2_add,
    mat2_inverse,
    mat2_mul,
    mat2_transpose,
)
from .matpoly import MatPoly, Params
from .weight import Weight

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RightDiffOp:
    f2: MatPoly
    f1: MatPoly
    f0: MatPoly

    def __sub__(self, other: RightDiffOp) -> RightDiffOp:
        return RightDiffOp(self.f2 - other.f2, self.f1 - other.f1, self.f0 - other.f0)

    def coeff_distance(self, other: RightDiffOp) -> float:
        d = self - other
        return max(d.f2.coeff_norm(), d.f1.coeff_norm(), d.f0.coeff_norm())


def apply_right(op: RightDiffOp, f: MatPoly) -> MatPoly:
    """f'' F2 + f' F1 + f F0, with the coefficients multiplying on the right."""
    return f.deriv(2) @ op.f2 + f.deriv() @ op.f1 + f @ op.f0


# -----------------------------------------------------------------------------
# 1. THE OPERATORS D AND D~
# -----------------------------------------------------------------------------


def _check_big_n(big_n: int) -> int:
    if isinstance(big_n, bool) or int(big_n) != big_n or big_n < 0:
        raise ParameterError(f"N must be a non-negative integer, got {big_n!r}")
    return int(big_n)


def op_d(params: Params) -> RightDiffOp:
    n, p = params.n, params.p
    return RightDiffOp(
        f2=MatPoly.scalar([1.0, 0.0, -1.0]),
        f1=MatPoly.from_power([-2.0 * J, -(n + 2) * np.eye(2)]),
        f0=MatPoly.constant(-diag2(p, n - p)),
    )


def eigenvalue(w: int, params: Params) -> Mat2:
    """Lambda_w, with R_w D = Lambda_w R_w."""
    n, p = params.n, params.p
    base = -w * (w + n + 1)
    return diag2(base - p, base - (n - p))


def e0(params: Params) -> Mat2:
    return antidiag2(params.n - params.p + 1, params.p + 1)


def e1(params: Params, big_n: int) -> Mat2:
    n, p = params.n, params.p
    big_n = _check_big_n(big_n)
    return -big_n * (big_n + n + 2) * np.eye(2) - diag2(p, n - p)


def _check_alpha(alpha: float, closed: bool = False) -> float:
    if not (-1.0 < alpha < 1.0 or (closed and alpha == 1.0)):
        raise ParameterError(f"alpha must lie in (-1, 1), got {alpha}")
    return float(alpha)


def op_dtilde(
    params: Params,
    big_n: int,
    alpha: float,
    include_e0: bool = True,
    diagnostic: bool = False,
) -> RightDiffOp:
    """
    The operator commuting with time-and-band limiting to [-1, alpha] and
    degrees <= N. `include_e0=False` drops E0 from F0 (a broken variant
    used as a negative control). `diagnostic=True` also accepts alpha = 1.
    """
    big_n = _check_big_n(big_n)
    alpha = _check_alpha(alpha, closed=diagnostic)
    n, p = params.n, params.p
    eye = np.eye(2)

    constant = alpha * (n - 2 * p) * E11 + (e0(params) if include_e0 else 0.0)

    return RightDiffOp(
        f2=MatPoly.scalar([alpha, -1.0, -alpha, 1.0]),
        f1=MatPoly.from_power(
            [-eye - 2 * alpha * J, -alpha * (n + 2) * eye + 2 * J, (n + 3) * eye]
        ),
        f0=MatPoly.from_power([constant, -big_n * (big_n + n + 2) * eye]),
    )


def dtilde_decomposition(params: Params, big_n: int, alpha: float) -> RightDiffOp:
    """-D (x - alpha) + d/dx (x^2 - 1) + E1 x + alpha (n - p) I + E0."""
    alpha = _check_alpha(alpha)
    d = op_d(params)
    shift = [alpha, -1.0]

    f0_extra = MatPoly.from_power(
        [mat2_add(e0(params), alpha * (params.n - params.p) * np.eye(2)), e1(params, big_n)]
    )
    return RightDiffOp(
        f2=d.f2.mul_scalar_poly(shift),
        f1=d.f1.mul_scalar_poly(shift) + MatPoly.scalar([-1.0, 0.0, 1.0]),
        f0=d.f0.mul_scalar_poly(shift) + f0_extra,
    )


def eigen_residual(w: int, params: Params, orthonormal: bool = False) -> float:
    """||R_w D - Lambda_w R_w|| on coefficients, relative to the largest of its terms."""
    r = orthonormal_qw(w, params) if orthonormal else monic_rw(w, params)
    op = op_d(params)
    terms = [
        r.deriv(2) @ op.f2,
        r.deriv() @ op.f1,
        r @ op.f0,
        r.mul_left_const(eigenvalue(w, params)),
    ]
    return _relative(terms[0] + terms[1] + terms[2] - terms[3], [r, *terms])


# -----------------------------------------------------------------------------
# 2. SYMMETRY WITH RESPECT TO THE WEIGHT
# -----------------------------------------------------------------------------


class BoundaryLimit(NamedTuple):
    endpoint: float
    f2w: tuple[float, ...]
    f1w: tuple[float, ...]

    @property
    def final(self) -> float:
        return max(self.f2w[-1], self.f1w[-1])

    @property
    def monotone(self) -> bool:
        def decays(seq):
            slack = 1e-12 * seq[0] + 1e-300
            return all(b <= a * (1 + 1e-9) + slack for a, b in zip(seq, seq[1:]))

        return decays(self.f2w) and decays(self.f1w)

    def passed(self, tol: float = 1e-8) -> bool:
        return self.final <= tol and self.monotone


class SymmetryReport(NamedTuple):
    residuals: tuple[float, float, float]  # relative to the size of the terms
    absolute: tuple[float, float, float]
    boundary: tuple[BoundaryLimit, BoundaryLimit]

    def passed(self, tol: float = 1e-9, boundary_tol: float = 1e-8) -> bool:
        return all(r <= tol for r in self.residuals) and all(
            b.passed(boundary_tol) for b in self.boundary
        )


APPROACH = range(5, 31)


def _boundary_terms(op: RightDiffOp, weight: Weight, x: NDArray) -> tuple[NDArray, NDArray]:
    """||F2 W||_F and ||F1 W - W F1^T||_F at x."""
    w = weight(x)
    f2w = op.f2(x) @ w
    f1w = op.f1(x) @ w
    return (
        np.linalg.norm(f2w, axis=(-2, -1)),
        np.linalg.norm(f1w - np.swapaxes(f1w, -1, -2), axis=(-2, -1)),
    )


def symmetry_residuals(
    op: RightDiffOp, weight: Weight, a: float, b: float, grid: int = 64
) -> SymmetryReport:
    """
    Pointwise symmetry equations on (a, b)

        F2 W - W F2^T = 0
        2 (F2 W)' - F1 W - W F1^T = 0
        (F2 W)'' - (F1 W)' + F0 W - W F0^T = 0

    with the weight's derivatives in closed form, and the boundary terms
    F2 W and F1 W - W F1^T along x_k = endpoint -+ 2^-k (b - a).
    """
    if not -1.0 <= a < b <= 1.0:
        raise ParameterError(f"Need -1 <= a < b <= 1, got ({a}, {b})")
    if grid < 1:
        raise ParameterError(f"grid must be positive, got {grid}")

    x = np.linspace(a, b, grid + 2)[1:-1]
    phi = weight.factor(x)[:, None, None]
    u = weight.log_derivative(x)[:, None, None]
    du = weight.log_derivative_prime(x)[:, None, None]

    def T(m):
        return np.swapaxes(m, -1, -2)

    f2p = op.f2 @ weight.poly
    f1p = op.f1 @ weight.poly
    f0p = op.f0 @ weight.poly

    F2P, dF2P, ddF2P = f2p(x), f2p.deriv()(x), f2p.deriv(2)(x)
    F1P, dF1P = f1p(x), f1p.deriv()(x)
    F0P = f0p(x)

    eq1 = [F2P, -T(F2P)]
    eq2 = [2 * u * F2P, 2 * dF2P, -F1P, -T(F1P)]
    eq3 = [(u * u + du) * F2P, 2 * u * dF2P, ddF2P, -u * F1P, -dF1P, F0P, -T(F0P)]

    absolute, relative = [], []
    for terms in (eq1, eq2, eq3):
        total = phi * sum(terms)
        size = phi * sum(np.abs(t) for t in terms)
        res = float(np.max(np.linalg.norm(total, axis=(-2, -1))))
        scale = float(np.max(np.linalg.norm(size, axis=(-2, -1))))
        absolute.append(res)
        relative.append(res / scale if scale > 0 else res)

    width = b - a
    limits = []
    for endpoint, sign in ((a, 1.0), (b, -1.0)):
        xs = np.array([endpoint + sign * 2.0**-k * width for k in APPROACH])
        f2w, f1w = _boundary_terms(op, weight, xs)
        limits.append(BoundaryLimit(endpoint, tuple(map(float, f2w)), tuple(map(float, f1w))))

    report = SymmetryReport(tuple(relative), tuple(absolute), tuple(limits))
    logger.debug("Symmetry residuals on [%g, %g]: %s", a, b, report.residuals)
    return report


# -----------------------------------------------------------------------------
# 3. DIFFERENTIATION FORMULAS
# -----------------------------------------------------------------------------


class DiffFormula(NamedTuple):
    f: Mat2
    g: Mat2
    g_tilde: Mat2
    h: Mat2


def canonical_a21(w: int, params: Params) -> float:
    n, p = params.n, params.p
    return -1.0 - (n + 2 * w) / ((p + w) * (n - p + w))


def diff_formula_matrices(
    w: int,
    params: Params,
    a21: float = 0.0,
    c12: float = 0.0,
    a11: float = 0.0,
    a22: float = 0.0,
) -> DiffFormula:
    """
    F_w, G_w, G~_w, H_w in

        (1 - x^2) R_w' = -w x R_w + x (F_w R_w - R_w F_w) + G_w R_w
                         + R_w G~_w + H_w R_{w-1}.
    """
    n, p = params.n, params.p
    if c12 != 0.0 and params.balanced:
        raise ParameterError("c12 != 0 needs n != 2p (the c12 terms carry 1/(n - 2p))")

    m = diag2(p, n - p)
    lead = (n + 2 * w) / ((p + w) * (n - p + w))
    c12_f = c12 * (p + w) * (n - p + w) / (n - 2 * p) if c12 != 0.0 else 0.0

    f = -lead * m - a21 * m + c12_f * antidiag2(p, n - p) + a11 * np.eye(2)

    g = (
        antidiag2(p * (n - p + w) / (p + w) ** 2, (n - p) * (p + w) / (n - p + w) ** 2)
        + a21 * antidiag2(p * (n - p + w) / (p + w), (n - p) * (p + w) / (n - p + w))
        + c12 * (w * (w + n) - p * (n - p)) * E11
        + a22 * np.eye(2)
    )

    g_tilde = (
        J
        - (lead + a21) * antidiag2(n - p, p)
        + c12 * diag2(p * (n - p), -w * (w + n))
        - a22 * np.eye(2)
    )

    if w == 0:
        h = np.zeros((2, 2))
    else:
        h = w * (w + n) / ((p + w) * (n - 1 + 2 * w) * (n - p + w)) * diag2(
            (p + w - 1) * (n - p + w + 1), (p + w + 1) * (n - p + w - 1)
        ) + c12 * w * (n + w) / (n - 1 + 2 * w) * antidiag2(
            p * (n - p + w - 1) / (p + w), -(p + w - 1) * (n - p) / (n - p + w)
        )

    return DiffFormula(f, g, g_tilde, h)


def canonical_diff_matrices(w: int, params: Params) -> DiffFormula:
    return diff_formula_matrices(w, params, a21=canonical_a21(w, params))


def _relative(residual: MatPoly, terms: list[MatPoly]) -> float:
    scale = max(t.coeff_norm() for t in terms)
    return residual.coeff_norm() / scale if scale > 0 else residual.coeff_norm()


def _diff_identity(w: int, r: MatPoly, r_prev: MatPoly | None, f_left, f_right, g, g_tilde, h) -> float:
    lhs = r.deriv().mul_scalar_poly([1.0, 0.0, -1.0])
    terms = [
        r.mul_x().scale(-w),
        (r.mul_left_const(f_left) - r.mul_right_const(f_right)).mul_x(),
        r.mul_left_const(g),
        r.mul_right_const(g_tilde),
    ]
    if r_prev is not None:
        terms.append(r_prev.mul_left_const(h))

    rhs = terms[0]
    for t in terms[1:]:
        rhs = rhs + t
    return _relative(lhs - rhs, [lhs, *terms])


def diff_formula_residual(
    w: int, params: Params, formula: DiffFormula | None = None, **free: float
) -> float:
    """Relative coefficient residual of the monic differentiation formula."""
    formula = formula or diff_formula_matrices(w, params, **free)
    r_prev = monic_rw(w - 1, params) if w >= 1 else None
    return _diff_identity(
        w, monic_rw(w, params), r_prev, formula.f, formula.f, formula.g, formula.g_tilde, formula.h
    )


class OrthonormalDiffFormula(NamedTuple):
    f_bar: Mat2
    g_bar: Mat2
    h_bar: Mat2
    g_tilde: Mat2


def orthonormal_diff_matrices(w: int, params: Params, **free: float) -> OrthonormalDiffFormula:
    """Conjugates of F_w, G_w, H_w by the quadrature norms; G~_w is unchanged."""
    formula = diff_formula_matrices(w, params, **free)
    s_w = inverse_norm(w, params)
    norm_w = mat2_inverse(s_w)

    h_bar = np.zeros((2, 2))
    if w >= 1:
        h_bar = mat2_mul(s_w, formula.h) @ np.diag(np.sqrt(np.diag(norm_squared(w - 1, params))))

    return OrthonormalDiffFormula(
        mat2_mul(mat2_mul(s_w, formula.f), norm_w),
        mat2_mul(mat2_mul(s_w, formula.g), norm_w),
        h_bar,
        formula.g_tilde,
    )


def orthonormal_diff_residual(w: int, params: Params, **free: float) -> float:
    bar = orthonormal_diff_matrices(w, params, **free)
    f = diff_formula_matrices(w, params, **free).f
    q_prev = orthonormal_qw(w - 1, params) if w >= 1 else None
    return _diff_identity(
        w, orthonormal_qw(w, params), q_prev, bar.f_bar, f, bar.g_bar, bar.g_tilde, bar.h_bar
    )


def diff_formula_structure(w: int, params: Params) -> dict[str, float]:
    """
    Deviations of the canonical choice (a21 from `canonical_a21`) from its structure:
    F = diag(p, n - p), G~ = E0, H = (n + 2w + 1) A_w, F-bar = F,
    G-bar symmetric and H-bar = (n + 2w + 1) A~_w.
    """
    n, p = params.n, params.p
    formula = canonical_diff_matrices(w, params)
    bar = orthonormal_diff_matrices(w, params, a21=canonical_a21(w, params))
    a_w, _ = recursion_matrices(w, params)
    a_tilde, _ = orthonormal_recursion(w, params)
    k = n + 2 * w + 1

    return {
        "f": frobenius(formula.f - diag2(p, n - p)),
        "g_tilde": frobenius(formula.g_tilde - e0(params)),
        "h": frobenius(formula.h - k * a_w),
        "f_bar": frobenius(bar.f_bar - formula.f),
        "g_bar_symmetry": frobenius(bar.g_bar - mat2_transpose(bar.g_bar)) / frobenius(bar.g_bar),
        "h_bar": frobenius(bar.h_bar - k * a_tilde),
    }


def corollary_residuals(w: int, params: Params, which: int) -> float:
    """
    Relative coefficient residual of

        0 = x (M R_w - R_w M) + N R_w + R_w N~ (+ J_w R_{w-1} for which=2).
    """
    n, p = params.n, params.p
    r = monic_rw(w, params)

    if which == 1:
        m = diag2(p, n - p)
        nn = -antidiag2(p * (n - p + w) / (p + w), (n - p) * (p + w) / (n - p + w))
        nt = antidiag2(n - p, p)
        extra = None
    elif which == 2:
        if params.balanced:
            raise ParameterError("The second corollary needs n != 2p")
        m = (p + w) * (n - p + w) / (n - 2 * p) * antidiag2(p, n - p)
        nn = (w * (w + n) - p * (n - p)) * E11
        nt = diag2(p * (n - p), -w * (w + n))
        extra = None
        if w >= 1:
            jw = w * (n + w) / (n - 1 + 2 * w) * antidiag2(
                p * (n - p + w - 1) / (p + w), -(p + w - 1) * (n - p) / (n - p + w)
            )
            extra = monic_rw(w - 1, params).mul_left_const(jw)
    else:
        raise ParameterError(f"which must be 1 or 2, got {which!r}")

    terms = [
        (r.mul_left_const(m) - r.mul_right_const(m)).mul_x(),
        r.mul_left_const(nn),
        r.mul_right_const(nt),
    ]
    if extra is not None:
        terms.append(extra)

    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return _relative(total, terms)


def h_prefactor_comparison(params: Params, w_max: int = 12) -> dict[str, float]:
    """
    Max over 1 <= w <= w_max of the differentiation-formula residual for the
    canonical choice with H_w = k A_w, for k = n + 2w + 1 and 2n + 2w + 1.
    """
    n = params.n
    out = {"n+2w+1": 0.0, "2n+2w+1": 0.0}

    for w in range(1, w_max + 1):
        base = canonical_diff_matrices(w, params)
        a_w, _ = recursion_matrices(w, params)
        for label, k in (("n+2w+1", n + 2 * w + 1), ("2n+2w+1", 2 * n + 2 * w + 1)):
            formula = base._replace(h=k * a_w)
            out[label] = max(out[label], diff_formula_residual(w, params, formula))

    logger.info("H prefactor residuals: %s", out)
    return out
