"""
The identity suite: every check is measured as a residual against a
tolerance and captured as a Passed/Failed outcome, so a single failing or
raising check never hides the others.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cache
from typing import Any, Callable

import numpy as np

from .families import (
    christoffel_darboux_grid,
    gram_deviation,
    norm_ratio_table,
    orthonormal_recursion_residual,
    recursion_consistency,
    recursion_residual,
    recursion_route_distance,
    route_agreement,
)
from .operators import (
    corollary_residuals,
    diff_formula_residual,
    dtilde_decomposition,
    eigen_residual,
    h_prefactor_comparison,
    canonical_a21,
    diff_formula_structure,
    op_d,
    op_dtilde,
    orthonormal_diff_residual,
    symmetry_residuals,
)
from .errors import MvProlateError
from .outcome import Check, Failed, Outcome, as_record, evaluate
from .timeband import (
    TBConfig,
    b_structure,
    build_b,
    build_m,
    commutator_residual,
    galerkin_closed_form,
    kernel_identity_grid,
    prolate_spectrum,
)
from .weight import Weight

logger = logging.getLogger(__name__)

CD_GRID = 32
RANDOM_DRAWS = 10
BOUNDARY_TOL = 1e-8
CROSS_TOL = 1e-8


@dataclass(frozen=True)
class SuiteReport:
    outcomes: tuple[Outcome, ...]

    @property
    def passed(self) -> bool:
        return all(o.is_ok() for o in self.outcomes)

    def failures(self) -> list[Outcome]:
        return [o for o in self.outcomes if o.is_err()]

    def records(self) -> list[dict[str, Any]]:
        return [as_record(o) for o in self.outcomes]


def _max(values) -> float:
    return max((float(v) for v in values), default=0.0)


def _boundary(report) -> float:
    """Largest final boundary value; inf when the approach is not monotone."""
    if not all(b.monotone for b in report.boundary):
        return math.inf
    return max(b.final for b in report.boundary)


def _after(prerequisite: Outcome, name: str, compute: Callable[[], float], tolerance: float) -> Outcome:
    """Measures `name` only once `prerequisite` passed; otherwise it fails unmeasured."""

    def unmeasured(failed: Failed) -> Outcome:
        if failed.check.name == name:
            return failed
        reason = MvProlateError(f"requires {failed.check.name}")
        return Failed(Check(name, math.inf, tolerance), reason)

    return prerequisite.then(lambda _: evaluate(name, compute, tolerance)).catch(unmeasured)


def run_suite(config: TBConfig, tol: float = 1e-9, seed: int = 0) -> SuiteReport:
    """Runs every identity check for `config`; degrees are checked up to N."""
    params, big_n, alpha = config.params, config.big_n, config.alpha
    degrees = range(big_n + 1)
    weight = Weight(params)
    rng = np.random.default_rng(seed)

    @cache
    def gram():
        return build_m(config)

    @cache
    def galerkin():
        return build_b(config, check_invariance=False)

    @cache
    def structure():
        return b_structure(config, galerkin())

    @cache
    def dtilde_symmetry():
        return symmetry_residuals(config.dtilde, weight, -1.0, alpha)

    @cache
    def d_symmetry():
        return symmetry_residuals(op_d(params), weight, -1.0, 1.0)

    def random_diff_formula():
        worst = 0.0
        for _ in range(RANDOM_DRAWS):
            a21, c12, a11, a22 = rng.uniform(-2.0, 2.0, size=4)
            if params.balanced:
                c12 = 0.0
            for w in degrees:
                worst = max(
                    worst, diff_formula_residual(w, params, a21=a21, c12=c12, a11=a11, a22=a22)
                )
        return worst

    def decomposition():
        direct = op_dtilde(params, big_n, alpha)
        scale = max(1.0, direct.f0.coeff_norm(), direct.f1.coeff_norm())
        return direct.coeff_distance(dtilde_decomposition(params, big_n, alpha)) / scale

    def kernel_identity():
        return _max(r["residual"] / (1 + r["kernel_norm"]) for r in kernel_identity_grid(config))

    def spectrum_cross():
        report = prolate_spectrum(config, tol=CROSS_TOL, gram=gram(), galerkin=galerkin())
        s = [m.s_eigenvalue for m in report.modes]
        out_of_range = any(v < -1e-10 or v > 1 + 1e-10 for v in s)
        return math.inf if out_of_range else _max(m.cross_residual for m in report.modes)

    def closed_form():
        built = galerkin().entries
        return float(
            np.linalg.norm(built - galerkin_closed_form(config).entries) / np.linalg.norm(built)
        )

    checks: list[tuple] = [
        ("orthonormality", lambda: gram_deviation(big_n, params), tol),
        ("route_agreement", lambda: _max(route_agreement(w, params) for w in degrees), tol),
        ("recursion_route", lambda: _max(recursion_route_distance(w, params) for w in degrees), tol),
        ("eigen_relation", lambda: _max(eigen_residual(w, params) for w in degrees), tol),
        (
            "eigen_relation_orthonormal",
            lambda: _max(eigen_residual(w, params, orthonormal=True) for w in degrees),
            tol,
        ),
        ("monic_recursion", lambda: _max(recursion_residual(w, params) for w in degrees), tol),
        ("recursion_norms", lambda: _max(recursion_consistency(w, params) for w in degrees), tol),
        (
            "orthonormal_recursion",
            lambda: _max(orthonormal_recursion_residual(w, params) for w in degrees),
            tol,
        ),
        (
            "christoffel_darboux",
            lambda: _max(
                christoffel_darboux_grid(w, params, CD_GRID) for w in range(1, big_n + 1)
            ),
            tol,
        ),
        (
            "diff_formula_main",
            lambda: _max(
                diff_formula_residual(w, params, a21=canonical_a21(w, params)) for w in degrees
            ),
            tol,
        ),
        ("diff_formula_random", random_diff_formula, tol),
        (
            "diff_formula_orthonormal",
            lambda: _max(
                orthonormal_diff_residual(w, params, a21=canonical_a21(w, params))
                for w in degrees
            ),
            tol,
        ),
        (
            "diff_formula_structure",
            lambda: _max(max(diff_formula_structure(w, params).values()) for w in degrees),
            tol,
        ),
        ("corollary_1", lambda: _max(corollary_residuals(w, params, 1) for w in degrees), tol),
    ]

    if not params.balanced:
        checks.append(
            ("corollary_2", lambda: _max(corollary_residuals(w, params, 2) for w in degrees), tol)
        )

    checks += [
        ("dtilde_decomposition", decomposition, tol),
        ("symmetry_d_equations", lambda: _max(d_symmetry().residuals), tol),
        ("symmetry_d_boundary", lambda: _boundary(d_symmetry()), BOUNDARY_TOL),
        ("symmetry_dtilde_equations", lambda: _max(dtilde_symmetry().residuals), tol),
        ("symmetry_dtilde_boundary", lambda: _boundary(dtilde_symmetry()), BOUNDARY_TOL),
        ("kernel_identity", kernel_identity, tol),
        ("span_invariance", lambda: structure()["coupling"], 1e-10),
        ("b_tridiagonal", lambda: structure()["tridiagonal"], 1e-10),
        ("b_symmetry", lambda: structure()["asymmetry"], 1e-10),
        ("b_closed_form", closed_form, tol),
        ("commutator", lambda: commutator_residual(config, gram(), galerkin()), tol),
        ("spectrum_cross_residual", spectrum_cross, CROSS_TOL, "b_symmetry"),
    ]

    outcomes: dict[str, Outcome] = {}
    for name, compute, tolerance, *requires in checks:
        if requires:
            outcome = _after(outcomes[requires[0]], name, compute, tolerance)
        else:
            outcome = evaluate(name, compute, tolerance)
        status = "ok" if outcome.is_ok() else "FAIL"
        logger.info("%-28s %s residual=%.3e", name, status, outcome.check.residual)
        outcomes[name] = outcome

    return SuiteReport(tuple(outcomes.values()))


def anomaly_report(config: TBConfig, w_max: int = 20) -> dict[str, Any]:
    """Norm-formula ratio table and the H_w prefactor comparison."""
    params = config.params
    return {
        "norm_ratio": norm_ratio_table(params, w_max),
        "h_prefactor": h_prefactor_comparison(params, min(w_max, 12)),
    }
