"""
Gauss-Jacobi rules by Golub-Welsch and the matrix inner products

    <f, g>       = int_{-1}^{1}     f(x) W(x) g(x)^T dx
    <f, g>_alpha = int_{-1}^{alpha} f(x) W(x) g(x)^T dx.

On the full interval both endpoint factors of the weight are absorbed into
the rule, which is then exact. On [-1, alpha] only (1 + x)^beta is absorbed;
(1 - x)^beta stays in the integrand, and the rule is refined by doubling
until two successive values agree.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.special import beta as beta_fn

from .errors import ConvergenceError, ParameterError
from .linalg import sym_eig
from .matpoly import MatPoly, Params
from .weight import Weight

logger = logging.getLogger(__name__)


class Interval(Enum):
    FULL = "full"


FULL = Interval.FULL

type Upper = float | Interval


@dataclass(frozen=True, eq=False)
class QuadRule:
    nodes: NDArray[np.float64]
    weights: NDArray[np.float64]
    interval: tuple[float, float]
    left_exp: float
    right_exp: float
    exact_degree: int | str

    def integrate(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        """Weighted sum over the leading (node) axis."""
        return np.tensordot(self.weights, values, axes=1)

    def __len__(self):
        return self.nodes.size


@dataclass(frozen=True)
class QuadPolicy:
    """Rule order policy: max(degree + n + extra, base_min) unless `order` is fixed."""

    base_min: int = 40
    extra: int = 8
    max_doublings: int = 6
    rtol: float = 1e-12
    order: int | None = None

    def __post_init__(self):
        if self.base_min < 1 or self.extra < 0 or self.max_doublings < 0:
            raise ParameterError(f"Invalid quadrature policy {self}")
        if not self.rtol > 0:
            raise ParameterError(f"rtol must be positive, got {self.rtol}")
        if self.order is not None and self.order < 1:
            raise ParameterError(f"Rule order must be >= 1, got {self.order}")

    def base_order(self, degree: int, n: float) -> int:
        if self.order is not None:
            return self.order
        return max(math.ceil(degree + n) + self.extra, self.base_min)


DEFAULT_POLICY = QuadPolicy()


# -----------------------------------------------------------------------------
# 1. GAUSS-JACOBI RULES
# -----------------------------------------------------------------------------


def _jacobi_recurrence(m: int, a: float, b: float):
    """
    Recurrence coefficients of the monic Jacobi polynomials for the weight
    (1 - t)^a (1 + t)^b on [-1, 1], plus the total mass.
    """
    diag = np.zeros(m)
    offsq = np.zeros(max(m - 1, 0))

    diag[0] = (b - a) / (a + b + 2)
    for k in range(1, m):
        s = 2 * k + a + b
        diag[k] = (b * b - a * a) / (s * (s + 2))

    if m > 1:
        offsq[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
    for k in range(2, m):
        s = 2 * k + a + b
        offsq[k - 1] = 4 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1) * (s - 1))

    mass = 2.0 ** (a + b + 1) * beta_fn(a + 1, b + 1)
    return diag, offsq, mass


@lru_cache(maxsize=256)
def _reference_rule(m: int, left_exp: float, right_exp: float):
    diag, offsq, mass = _jacobi_recurrence(m, right_exp, left_exp)

    jacobi = np.diag(diag)
    if m > 1:
        off = np.sqrt(offsq)
        jacobi += np.diag(off, 1) + np.diag(off, -1)

    nodes, vectors = sym_eig(jacobi, tol=1e-12)
    weights = mass * vectors[0] ** 2

    nodes.setflags(write=False)
    weights.setflags(write=False)
    logger.debug("Built Gauss-Jacobi rule m=%d exps=(%g, %g)", m, left_exp, right_exp)
    return nodes, weights


def gauss_rule(
    m: int, left_exp: float, right_exp: float, a: float = -1.0, b: float = 1.0
) -> QuadRule:
    """
    m-point Gauss rule for the weight (x - a)^left_exp (b - x)^right_exp on
    (a, b); exact for polynomials of degree <= 2m - 1 against it.
    """
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ParameterError(f"Rule order must be a positive integer, got {m!r}")
    if not (left_exp > -1 and right_exp > -1):
        raise ParameterError(f"Exponents must exceed -1, got ({left_exp}, {right_exp})")
    if not a < b:
        raise ParameterError(f"Interval must satisfy a < b, got ({a}, {b})")

    t, wt = _reference_rule(int(m), float(left_exp), float(right_exp))
    half = 0.5 * (b - a)

    return QuadRule(
        nodes=a + half * (t + 1.0),
        weights=wt * half ** (left_exp + right_exp + 1),
        interval=(a, b),
        left_exp=left_exp,
        right_exp=right_exp,
        exact_degree=2 * int(m) - 1,
    )


# -----------------------------------------------------------------------------
# 2. MATRIX INNER PRODUCTS
# -----------------------------------------------------------------------------


def _is_full(alpha: Upper) -> bool:
    return alpha is FULL or alpha == 1.0


def _check_alpha(alpha: Upper) -> None:
    if alpha is FULL:
        return
    if not -1.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must lie in (-1, 1], got {alpha}")


def integrate_weighted(
    integrand: Callable[[NDArray, NDArray], NDArray],
    params: Params,
    alpha: Upper = FULL,
    degree: int = 0,
    policy: QuadPolicy = DEFAULT_POLICY,
) -> NDArray[np.float64]:
    """
    int integrand(x, V(x)) over [-1, 1] or [-1, alpha], where V(x) is the
    part of W(x) the rule does not absorb, shape (K, 2, 2).

    `degree` is the polynomial degree of the integrand apart from the weight;
    it sets the base rule order.
    """
    _check_alpha(alpha)
    weight = Weight(params)
    beta = params.beta
    m = policy.base_order(degree, params.n)

    if _is_full(alpha):
        rule = gauss_rule(m, beta, beta, -1.0, 1.0)
        return rule.integrate(integrand(rule.nodes, weight.poly(rule.nodes)))

    alpha = float(alpha)

    def estimate(order: int):
        rule = gauss_rule(order, beta, 0.0, -1.0, alpha)
        x = rule.nodes
        smooth = np.power(1.0 - x, beta)[:, None, None] * weight.poly(x)
        values = integrand(x, smooth)
        scale = np.linalg.norm(rule.integrate(np.abs(values)))
        return rule.integrate(values), scale

    # (1 - x)^beta is a polynomial for integer beta >= 0.
    if beta >= 0 and float(beta).is_integer():
        return estimate(m)[0]

    current, _ = estimate(m)
    last_pair = (current, current)
    for _ in range(policy.max_doublings):
        m *= 2
        previous, (current, scale) = current, estimate(m)
        last_pair = (previous, current)
        change = np.linalg.norm(current - previous)
        if change <= policy.rtol * max(np.linalg.norm(current), scale):
            logger.debug("Truncated quadrature converged at order %d", m)
            return current

    raise ConvergenceError(
        f"Truncated quadrature on [-1, {alpha}] did not converge after "
        f"{policy.max_doublings} doublings",
        budget=policy.max_doublings,
        last_values=last_pair,
    )


def inner_product(
    f: MatPoly,
    g: MatPoly,
    params: Params,
    alpha: Upper = FULL,
    order: int | None = None,
    policy: QuadPolicy = DEFAULT_POLICY,
) -> NDArray[np.float64]:
    """<f, g> (or <f, g>_alpha); shape (f.rows, g.rows)."""
    if order is not None:
        policy = QuadPolicy(
            base_min=policy.base_min,
            extra=policy.extra,
            max_doublings=policy.max_doublings,
            rtol=policy.rtol,
            order=order,
        )

    def integrand(x, v):
        return f(x) @ v @ np.swapaxes(g(x), -1, -2)

    return integrate_weighted(
        integrand, params, alpha, max(f.degree, 0) + max(g.degree, 0), policy
    )
