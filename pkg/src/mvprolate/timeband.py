"""
Time-and-band limiting for the orthonormal family Q_0..Q_N.

Functions are 1x2 rows f = sum_w C_w Q_w; both operators act from the
right, so the Gram matrix M (band limiting to [-1, alpha]) and the Galerkin
matrix B of D~ multiply flattened coefficient rows from the right.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dispatch import operand_dispatch
from .errors import DomainError, InvarianceError, ParameterError
from .families import orthonormal_qw, orthonormal_recursion
from .linalg import BlockMat, frobenius, sym_eig
from .matpoly import MatPoly, Params
from .operators import (
    apply_right,
    eigenvalue,
    canonical_a21,
    op_dtilde,
    orthonormal_diff_matrices,
)
from .quadrature import DEFAULT_POLICY, FULL, QuadPolicy, integrate_weighted

logger = logging.getLogger(__name__)

INVARIANCE_TOL = 1e-10
CLUSTER_TOL = 1e-8
# s-eigenvalues within this distance of 0 or 1 are not resolved apart
GAP_FLOOR = 1e-10


@dataclass(frozen=True)
class TBConfig:
    """
    params, band limit N and cap boundary alpha in (-1, 1). `diagnostic`
    admits alpha = 1 (no band limiting), `include_e0=False` selects the broken
    operator used as a negative control and `workers` sets the assembly
    thread count.
    """

    params: Params
    big_n: int
    alpha: float
    quad: QuadPolicy = field(default=DEFAULT_POLICY)
    include_e0: bool = True
    workers: int = 1
    diagnostic: bool = False

    def __post_init__(self):
        if isinstance(self.big_n, bool) or int(self.big_n) != self.big_n or self.big_n < 0:
            raise ParameterError(f"N must be a non-negative integer, got {self.big_n!r}")
        object.__setattr__(self, "big_n", int(self.big_n))

        alpha = float(self.alpha)
        if not (-1.0 < alpha < 1.0 or (self.diagnostic and alpha == 1.0)):
            raise ParameterError(f"alpha must lie in (-1, 1), got {alpha}")
        object.__setattr__(self, "alpha", alpha)

        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")

    @property
    def dim(self) -> int:
        return 2 * (self.big_n + 1)

    @property
    def dtilde(self):
        return _dtilde(self.params, self.big_n, self.alpha, self.include_e0, self.diagnostic)


@lru_cache(maxsize=64)
def _dtilde(params, big_n, alpha, include_e0, diagnostic):
    return op_dtilde(params, big_n, alpha, include_e0=include_e0, diagnostic=diagnostic)


@lru_cache(maxsize=None)
def _q_dtilde(w: int, params: Params, big_n: int, alpha: float, include_e0: bool, diagnostic: bool) -> MatPoly:
    return apply_right(_dtilde(params, big_n, alpha, include_e0, diagnostic), orthonormal_qw(w, params))


def _family(config: TBConfig, size: int | None = None) -> list[MatPoly]:
    size = config.big_n + 1 if size is None else size
    return [orthonormal_qw(w, config.params) for w in range(size)]


def _family_values(config: TBConfig, x: NDArray, size: int | None = None) -> NDArray:
    """Q_w(x) for all w, shape (len(x), size, 2, 2)."""
    return np.stack([q(x) for q in _family(config, size)], axis=1)


def _assemble(config: TBConfig, row: Callable[[int], NDArray]) -> BlockMat:
    """Block rows computed (possibly in threads) and stacked in index order."""
    indices = range(config.big_n + 1)
    if config.workers == 1:
        rows = [row(w) for w in indices]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(row, indices))
    return BlockMat.from_blocks(np.stack(rows))


# -----------------------------------------------------------------------------
# 1. COEFFICIENT VECTORS AND THE TRANSFORM PAIR
# -----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoeffVec:
    """Coefficient rows C_0..C_N of f = sum_w C_w Q_w, shape (N + 1, 2)."""

    blocks: NDArray[np.float64]

    def __post_init__(self):
        b = np.array(self.blocks, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2 or b.shape[0] < 1:
            raise ParameterError(f"CoeffVec blocks must have shape (N+1, 2), got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise DomainError("CoeffVec entries must be finite")
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    @classmethod
    def zeros(cls, big_n: int) -> CoeffVec:
        return cls(np.zeros((big_n + 1, 2)))

    @classmethod
    def unit(cls, big_n: int, w: int, row: int) -> CoeffVec:
        b = np.zeros((big_n + 1, 2))
        b[w, row] = 1.0
        return cls(b)

    @classmethod
    def from_flat(cls, flat: ArrayLike) -> CoeffVec:
        flat = np.asarray(flat, dtype=float)
        if flat.ndim != 1 or flat.size % 2:
            raise ParameterError(f"Flat coefficient vector must have even length, got {flat.shape}")
        return cls(flat.reshape(-1, 2))

    @property
    def big_n(self) -> int:
        return self.blocks.shape[0] - 1

    @property
    def flat(self) -> NDArray[np.float64]:
        return self.blocks.reshape(-1)

    def matches(self, config: TBConfig) -> None:
        if self.big_n != config.big_n:
            raise ParameterError(
                f"Coefficient vector has N={self.big_n}, configuration has N={config.big_n}"
            )


@operand_dispatch
def analysis(f, config: TBConfig) -> CoeffVec:
    """C_w = <f, Q_w> on [-1, 1], for a row polynomial or a function of x."""
    raise TypeError(f"analysis does not accept {type(f).__name__}")


@analysis.register
def _(f: MatPoly, config: TBConfig) -> CoeffVec:
    if f.rows != 1:
        raise ParameterError("analysis expects a 1x2 row polynomial")
    family = _family(config)

    def integrand(x, v):
        fv = f(x) @ v
        return np.stack([fv @ np.swapaxes(q(x), -1, -2) for q in family], axis=1)

    values = integrate_weighted(
        integrand, config.params, FULL, max(f.degree, 0) + config.big_n, config.quad
    )
    return CoeffVec(values[:, 0, :])


@analysis.register
def _(f: Callable, config: TBConfig) -> CoeffVec:
    """Projection of f(x) (values of shape (K, 1, 2) or (K, 2)) onto the span."""

    def integrand(x, v):
        fx = np.asarray(f(x), dtype=float).reshape(len(x), 1, 2)
        qx = _family_values(config, x)
        return np.einsum("kr,krc,kwdc->kwd", fx[:, 0, :], v, qx)

    values = integrate_weighted(integrand, config.params, FULL, 2 * config.big_n, config.quad)
    return CoeffVec(values)


def synthesis(c: CoeffVec, config: TBConfig) -> MatPoly:
    """sum_w C_w Q_w as a 1x2 row polynomial."""
    c.matches(config)
    result = MatPoly.zero(rows=1)
    for w, q in enumerate(_family(config)):
        result = result + q.mul_left_const(c.blocks[w][None, :])
    return result


def evaluate_coeffs(c: CoeffVec, config: TBConfig, x: ArrayLike) -> NDArray[np.float64]:
    """f(x) for f = sum_w C_w Q_w, shape (len(x), 2)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.einsum("wr,swrc->sc", c.blocks, _family_values(config, x))


# -----------------------------------------------------------------------------
# 2. KERNEL AND THE INTEGRAL OPERATOR
# -----------------------------------------------------------------------------


def _check_unit(*points: float) -> None:
    for t in points:
        if not -1.0 <= t <= 1.0:
            raise DomainError(f"Kernel arguments must lie in [-1, 1], got {t}")


def kernel_eval(config: TBConfig, x: float, y: float) -> NDArray[np.float64]:
    """k(x, y) = sum_{w <= N} Q_w(x)^T Q_w(y)."""
    _check_unit(x, y)
    return sum(q(x).T @ q(y) for q in _family(config))


def kernel_slice(config: TBConfig, frozen: float) -> MatPoly:
    """
    sum_w Q_w(frozen)^T Q_w(t) as a polynomial in t. With frozen = y this is
    k(t, y)^T; with frozen = x it is k(x, t).
    """
    _check_unit(frozen)

    result = MatPoly.zero()
    for q in _family(config):
        result = result + q.mul_left_const(q(frozen).T)
    return result


def build_m(config: TBConfig) -> BlockMat:
    """Blocks <Q_m, Q_j>_alpha; the identity when alpha = 1."""
    family = _family(config)
    degree = 2 * config.big_n

    def row(m: int) -> NDArray:
        qm = family[m]

        def integrand(x, v):
            left = qm(x) @ v
            return np.stack([left @ np.swapaxes(q(x), -1, -2) for q in family], axis=1)

        return integrate_weighted(integrand, config.params, config.alpha, degree, config.quad)

    gram = _assemble(config, row)
    logger.debug("Built M for N=%d alpha=%g", config.big_n, config.alpha)
    return gram


def apply_s(c: CoeffVec, config: TBConfig, gram: BlockMat | None = None) -> CoeffVec:
    """Coefficient form of f -> f S: the row c times M."""
    c.matches(config)
    gram = build_m(config) if gram is None else gram
    return CoeffVec.from_flat(c.flat @ gram.entries)


def apply_s_direct(c: CoeffVec, config: TBConfig) -> CoeffVec:
    """
    f S evaluated pointwise from the integral of f(y) W(y) k(y, x) over
    [-1, alpha], then projected back by `analysis`.
    """
    c.matches(config)

    def fs(x):
        qx = _family_values(config, x)

        def integrand(y, v):
            fy = evaluate_coeffs(c, config, y)
            qy = _family_values(config, y)
            kernel = np.einsum("jwba,iwbc->jiac", qy, qx)
            return np.einsum("jb,jbc,jicd->jid", fy, v, kernel)

        return integrate_weighted(
            integrand, config.params, config.alpha, 2 * config.big_n, config.quad
        )

    return analysis(fs, config)


# -----------------------------------------------------------------------------
# 3. THE GALERKIN MATRIX OF D~
# -----------------------------------------------------------------------------


def _q_dtilde_of(config: TBConfig, w: int) -> MatPoly:
    return _q_dtilde(
        w, config.params, config.big_n, config.alpha, config.include_e0, config.diagnostic
    )


def _galerkin_row(config: TBConfig, w: int, size: int) -> NDArray:
    """<Q_w D~, Q_j> on [-1, 1] for j < size, shape (size, 2, 2)."""
    qd = _q_dtilde_of(config, w)
    family = _family(config, size)

    def integrand(x, v):
        left = qd(x) @ v
        return np.stack([left @ np.swapaxes(q(x), -1, -2) for q in family], axis=1)

    return integrate_weighted(
        integrand, config.params, FULL, qd.degree + size - 1, config.quad
    )


def invariance_coupling(config: TBConfig) -> float:
    """||<Q_N D~, Q_{N+1}>||_F relative to max(1, ||<Q_N D~, Q_j>||_F over j <= N)."""
    row = _galerkin_row(config, config.big_n, config.big_n + 2)
    scale = max(1.0, frobenius(row[:-1]))
    return frobenius(row[-1]) / scale


def build_b(config: TBConfig, check_invariance: bool = True) -> BlockMat:
    """
    B_{w,j} = <Q_w D~, Q_j> on the full interval. Raises InvarianceError if
    Q_N D~ couples to Q_{N+1}.
    """
    if check_invariance:
        coupling = invariance_coupling(config)
        if coupling > INVARIANCE_TOL:
            raise InvarianceError(coupling, INVARIANCE_TOL)

    galerkin = _assemble(config, lambda w: _galerkin_row(config, w, config.big_n + 1))
    logger.debug("Built B for N=%d alpha=%g", config.big_n, config.alpha)
    return galerkin


def galerkin_closed_form(config: TBConfig) -> BlockMat:
    """
    B from the recursion and differentiation formulas:

        B_{w,w-1} = (c_w - (n + 2w + 1)) A~_w
        B_{w,w}   = c_w B~_w + alpha Lambda_w + alpha (n - p) I - G-bar_w
        B_{w,w+1} = c_w A~_{w+1}^T

    with c_w = w (w + n + 2) - N (N + n + 2). Always the unmutated operator.
    """
    params, big_n, alpha = config.params, config.big_n, config.alpha
    n, p = params.n, params.p
    blocks = np.zeros((big_n + 1, big_n + 1, 2, 2))

    for w in range(big_n + 1):
        c_w = w * (w + n + 2) - big_n * (big_n + n + 2)
        a_w, b_w = orthonormal_recursion(w, params)
        g_bar = orthonormal_diff_matrices(w, params, a21=canonical_a21(w, params)).g_bar

        blocks[w, w] = (
            c_w * b_w + alpha * eigenvalue(w, params) + alpha * (n - p) * np.eye(2) - g_bar
        )
        if w >= 1:
            blocks[w, w - 1] = (c_w - (n + 2 * w + 1)) * a_w
        if w < big_n:
            a_next, _ = orthonormal_recursion(w + 1, params)
            blocks[w, w + 1] = c_w * a_next.T

    return BlockMat.from_blocks(blocks)


def b_structure(config: TBConfig, galerkin: BlockMat | None = None) -> dict[str, float]:
    """Span coupling, off-tridiagonal mass and asymmetry of B (all relative)."""
    galerkin = build_b(config, check_invariance=False) if galerkin is None else galerkin
    blocks = galerkin.blocks()
    k = galerkin.nblocks
    far = [blocks[w, j] for w in range(k) for j in range(k) if abs(w - j) >= 2]
    scale = frobenius(galerkin.entries) or 1.0

    return {
        "coupling": invariance_coupling(config),
        "tridiagonal": frobenius(np.array(far)) / scale if far else 0.0,
        "asymmetry": galerkin.asymmetry(),
    }


def commutator_residual(
    config: TBConfig, gram: BlockMat | None = None, galerkin: BlockMat | None = None
) -> float:
    """||M B - B M||_F / (||M||_F ||B||_F)."""
    gram = build_m(config) if gram is None else gram
    galerkin = build_b(config, check_invariance=False) if galerkin is None else galerkin
    m, b = gram.entries, galerkin.entries
    denom = frobenius(m) * frobenius(b)
    return frobenius(m @ b - b @ m) / denom if denom > 0 else 0.0


def kernel_identity_residual(config: TBConfig, x: float, y: float) -> float:
    """||(k^T D~_x)(x, y) - ((k D~_y)(x, y))^T||_F."""
    _check_unit(x, y)
    dtilde = config.dtilde
    lhs = apply_right(dtilde, kernel_slice(config, y))(x)
    rhs = apply_right(dtilde, kernel_slice(config, x))(y).T
    return frobenius(lhs - rhs)


def kernel_identity_grid(config: TBConfig, grid: int = 12) -> list[dict[str, float]]:
    """Residual and its bound 1e-9 (1 + ||k||) on a grid x grid lattice of [-1, 1]^2."""
    if grid < 1:
        raise ParameterError(f"grid must be positive, got {grid}")
    points = np.linspace(-1.0, 1.0, grid)
    out = []
    for x in points:
        for y in points:
            residual = kernel_identity_residual(config, float(x), float(y))
            size = frobenius(kernel_eval(config, float(x), float(y)))
            out.append(
                {
                    "x": float(x),
                    "y": float(y),
                    "residual": residual,
                    "kernel_norm": size,
                    "bound": 1e-9 * (1 + size),
                }
            )
    return out


# -----------------------------------------------------------------------------
# 4. SPECTRUM
# -----------------------------------------------------------------------------


class ModeRecord(NamedTuple):
    index: int
    b_eigenvalue: float
    s_eigenvalue: float
    cross_residual: float
    cluster: int


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    modes: tuple[ModeRecord, ...]
    vectors: NDArray[np.float64]  # columns, flattened coefficient rows
    commutator_residual: float
    min_gap_b: float
    min_gap_m: float
    flagged_clusters: tuple[int, ...] = ()

    @property
    def contrast(self) -> float:
        """min_gap_b / min_gap_m; the M gap only counts s in (GAP_FLOOR, 1 - GAP_FLOOR)."""
        return self.min_gap_b / self.min_gap_m if self.min_gap_m > 0 else math.inf

    def by_concentration(self) -> list[int]:
        """Mode positions sorted by s-eigenvalue, largest first."""
        return sorted(range(len(self.modes)), key=lambda i: -self.modes[i].s_eigenvalue)

    def as_dict(self) -> dict[str, Any]:
        return {
            "modes": [m._asdict() for m in self.modes],
            "commutator_residual": self.commutator_residual,
            "min_gap_B": self.min_gap_b,
            "min_gap_M": self.min_gap_m,
            "contrast": self.contrast,
            "flagged_clusters": list(self.flagged_clusters),
        }


def _min_normalized_gap(values: NDArray) -> float:
    values = np.sort(values)
    if values.size < 2:
        return math.inf
    spread = values[-1] - values[0]
    if spread == 0:
        return 0.0
    return float(np.min(np.diff(values)) / spread)


def _clusters(values: NDArray, tol: float) -> list[list[int]]:
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    groups = [[0]]
    for i in range(1, values.size):
        if values[i] - values[i - 1] < tol * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def prolate_spectrum(
    config: TBConfig,
    tol: float = 1e-8,
    cluster_tol: float = CLUSTER_TOL,
    gram: BlockMat | None = None,
    galerkin: BlockMat | None = None,
) -> SpectrumReport:
    """
    Eigenvectors of S through those of B. Near-degenerate B eigenvalues are
    clustered and M is diagonalized on each cluster; a cluster whose modes
    still miss `tol` is flagged, not rejected.
    """
    gram = build_m(config) if gram is None else gram
    galerkin = build_b(config) if galerkin is None else galerkin
    m = gram.entries

    b_values, vectors = sym_eig(galerkin)
    vectors = vectors.copy()

    groups = _clusters(b_values, cluster_tol)
    for group in groups:
        if len(group) > 1:
            sub = vectors[:, group]
            _, rotation = sym_eig(sub.T @ m @ sub)
            vectors[:, group] = sub @ rotation

    modes, flagged = [], []
    for cluster_id, group in enumerate(groups):
        for i in group:
            v = vectors[:, i]
            mv = m @ v
            s = float(v @ mv / (v @ v))
            cross = float(np.linalg.norm(mv - s * v))
            modes.append(ModeRecord(i, float(b_values[i]), s, cross, cluster_id))
            if cross > tol and cluster_id not in flagged:
                flagged.append(cluster_id)

    for cluster_id in flagged:
        logger.warning(
            "Cluster %d: M does not diagonalize on the B eigenspace within %.1e",
            cluster_id,
            tol,
        )

    s_values = np.array([mode.s_eigenvalue for mode in modes])
    resolved = s_values[(s_values > GAP_FLOOR) & (s_values < 1.0 - GAP_FLOOR)]
    report = SpectrumReport(
        modes=tuple(modes),
        vectors=vectors,
        commutator_residual=commutator_residual(config, gram, galerkin),
        min_gap_b=_min_normalized_gap(b_values),
        min_gap_m=_min_normalized_gap(resolved),
        flagged_clusters=tuple(flagged),
    )
    logger.info(
        "Spectrum N=%d alpha=%g: contrast %.3e, %d flagged clusters",
        config.big_n,
        config.alpha,
        report.contrast,
        len(flagged),
    )
    return report


def eigenfunctions(
    report: SpectrumReport, config: TBConfig, points: int = 201
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Every mode sampled on a uniform grid of [-1, alpha]: (x, values (modes, points, 2))."""
    if points < 2:
        raise ParameterError(f"points must be >= 2, got {points}")
    x = np.linspace(-1.0, config.alpha, points)
    qx = _family_values(config, x)
    coeffs = report.vectors.T.reshape(len(report.modes), config.big_n + 1, 2)
    return x, np.einsum("mwr,swrc->msc", coeffs, qx)


# -----------------------------------------------------------------------------
# 5. RECONSTRUCTION
# -----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    coeffs: CoeffVec
    modes_kept: int
    smallest_kept_s: float
    ill_conditioned: int
    relative_error: float | None = None
    warnings: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, Any]:
        return {
            "modes_kept": self.modes_kept,
            "smallest_kept_s": self.smallest_kept_s,
            "ill_conditioned": self.ill_conditioned,
            "relative_error": self.relative_error,
            "warnings": list(self.warnings),
        }


def reconstruct(
    samples_x: ArrayLike,
    samples_f: ArrayLike,
    config: TBConfig,
    modes_kept: int | None = None,
    noise_level: float = 0.0,
    truth: CoeffVec | None = None,
    spectrum: SpectrumReport | None = None,
) -> ReconstructionReport:
    """
    Least-squares fit of samples on [-1, alpha] in the `modes_kept` most
    concentrated prolate modes. When `modes_kept` is None the spectral cutoff
    keeps the modes with s >= noise_level^2 (at least one; all of them for
    noiseless data). The relative error is measured in L2(W) on [-1, 1],
    which is the coefficient 2-norm.
    """
    x = np.asarray(samples_x, dtype=float)
    f = np.asarray(samples_f, dtype=float).reshape(-1, 2)

    if x.ndim != 1 or x.size != f.shape[0] or not x.size:
        raise ParameterError("Samples need matching x (K,) and values (K, 2)")
    if np.any(x < -1.0) or np.any(x > config.alpha):
        raise DomainError(f"Samples must lie in [-1, {config.alpha}]")
    if noise_level < 0:
        raise ParameterError(f"noise_level must be >= 0, got {noise_level}")

    spectrum = prolate_spectrum(config) if spectrum is None else spectrum
    order = spectrum.by_concentration()
    total = len(order)
    floor = noise_level**2

    if modes_kept is None and floor == 0.0:
        kept = total
    elif modes_kept is None:
        kept = max(1, sum(spectrum.modes[i].s_eigenvalue >= floor for i in order))
        logger.info("Spectral cutoff at s >= %.1e keeps %d of %d modes", floor, kept, total)
    else:
        kept = modes_kept
    if isinstance(kept, bool) or not 1 <= kept <= total:
        raise ParameterError(f"modes_kept must lie in [1, {total}], got {modes_kept!r}")

    chosen = order[:kept]
    basis = spectrum.vectors[:, chosen]
    s_kept = np.array([spectrum.modes[i].s_eigenvalue for i in chosen])

    # design[k, r, m]: row r of mode m at x_k
    qx = _family_values(config, x)
    coeffs = basis.T.reshape(kept, config.big_n + 1, 2)
    design = np.einsum("mwr,kwrc->kcm", coeffs, qx).reshape(-1, kept)

    amplitudes, *_ = np.linalg.lstsq(design, f.reshape(-1), rcond=None)
    recovered = CoeffVec.from_flat(basis @ amplitudes)

    ill = int(np.sum(s_kept < floor))
    warnings = []
    if ill:
        message = (
            f"{ill} kept modes have s-eigenvalue below noise^2 = {floor:.1e}; "
            "the fit amplifies noise in them"
        )
        logger.warning(message)
        warnings.append(message)

    error = None
    if truth is not None:
        truth.matches(config)
        error = float(np.linalg.norm(recovered.flat - truth.flat) / np.linalg.norm(truth.flat))

    return ReconstructionReport(
        coeffs=recovered,
        modes_kept=kept,
        smallest_kept_s=float(s_kept.min()),
        ill_conditioned=ill,
        relative_error=error,
        warnings=tuple(warnings),
    )
