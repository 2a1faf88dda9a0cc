"""
Dense real linear algebra at the scale of this library: 2x2 blocks, block
matrices of size 2(N+1), and a cyclic Jacobi symmetric eigensolver.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dispatch import operand_dispatch
from .errors import (
    AsymmetryError,
    ConvergenceError,
    DomainError,
    ParameterError,
    SingularMatrixError,
)

logger = logging.getLogger(__name__)

type Mat2 = NDArray[np.float64]

SWEEP_BUDGET = 100
OFF_DIAGONAL_TOL = 1e-14
SYMMETRY_TOL = 1e-10

J = np.array([[0.0, 1.0], [1.0, 0.0]])
E11 = np.array([[1.0, 0.0], [0.0, 0.0]])


# -----------------------------------------------------------------------------
# 1. 2x2 BLOCKS
# -----------------------------------------------------------------------------


def mat2(a11: float, a12: float, a21: float, a22: float) -> Mat2:
    """Builds a 2x2 block from its row-major entries."""
    m = np.array([[a11, a12], [a21, a22]], dtype=float)
    if not np.all(np.isfinite(m)):
        raise DomainError(f"Non-finite entries in 2x2 block: {m.tolist()}")
    return m


def diag2(a: float, b: float) -> Mat2:
    return mat2(a, 0.0, 0.0, b)


def antidiag2(a: float, b: float) -> Mat2:
    """[[0, a], [b, 0]]"""
    return mat2(0.0, a, b, 0.0)


def frobenius(a: ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


def mat2_mul(a: Mat2, b: Mat2) -> Mat2:
    return np.asarray(a, dtype=float) @ np.asarray(b, dtype=float)


def mat2_add(a: Mat2, b: Mat2) -> Mat2:
    return np.asarray(a, dtype=float) + np.asarray(b, dtype=float)


def mat2_transpose(a: Mat2) -> Mat2:
    return np.asarray(a, dtype=float).T.copy()


def mat2_inverse(a: Mat2) -> Mat2:
    """Closed-form inverse; rejects |det| <= 1e-14 * ||a||^2."""
    a = np.asarray(a, dtype=float)
    det = float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])

    if abs(det) <= 1e-14 * frobenius(a) ** 2:
        raise SingularMatrixError(det)

    return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det


# -----------------------------------------------------------------------------
# 2. BLOCK MATRICES
# -----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockMat:
    """
    A dim x dim real matrix viewed as (dim/2) x (dim/2) blocks of size 2.

    Block (w, m) occupies rows 2w..2w+1 and columns 2m..2m+1, which is the
    interleaved flattening used for coefficient rows.
    """

    entries: NDArray[np.float64]

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)

        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2 or not a.size:
            raise ParameterError(
                f"BlockMat needs a square matrix of even positive size, got {a.shape}"
            )
        if not np.all(np.isfinite(a)):
            raise DomainError("BlockMat entries must be finite")

        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def from_blocks(cls, blocks: ArrayLike) -> BlockMat:
        """Assembles from an array of shape (K, K, 2, 2)."""
        b = np.asarray(blocks, dtype=float)
        k = b.shape[0]
        return cls(b.transpose(0, 2, 1, 3).reshape(2 * k, 2 * k))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def nblocks(self) -> int:
        return self.dim // 2

    def block(self, w: int, m: int) -> Mat2:
        return self.entries[2 * w : 2 * w + 2, 2 * m : 2 * m + 2].copy()

    def blocks(self) -> NDArray[np.float64]:
        k = self.nblocks
        return self.entries.reshape(k, 2, k, 2).transpose(0, 2, 1, 3).copy()

    def asymmetry(self) -> float:
        """||A - A^T||_F / ||A||_F (0 for the zero matrix)."""
        scale = frobenius(self.entries)
        if scale == 0.0:
            return 0.0
        return frobenius(self.entries - self.entries.T) / scale

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return self.asymmetry() <= tol

    def __matmul__(self, other: BlockMat) -> BlockMat:
        return BlockMat(self.entries @ other.entries)

    def __sub__(self, other: BlockMat) -> BlockMat:
        return BlockMat(self.entries - other.entries)

    def __repr__(self):
        return f"BlockMat(dim={self.dim})"


# -----------------------------------------------------------------------------
# 3. SYMMETRIC EIGENSOLVER
# -----------------------------------------------------------------------------


class Eigh(NamedTuple):
    values: NDArray[np.float64]
    vectors: NDArray[np.float64]


@operand_dispatch
def sym_eig(a, tol: float = 1e-10) -> Eigh:
    """
    Eigen-decomposition of a real symmetric matrix (2x2 block, ndarray or
    BlockMat) by cyclic Jacobi rotations.

    Eigenvalues come back ascending; each eigenvector has its first
    significant component positive.
    """
    raise TypeError(f"sym_eig does not accept {type(a).__name__}")


@sym_eig.register
def _(a: BlockMat, tol: float = 1e-10) -> Eigh:
    return _symmetric_eigh(a.entries, tol)


@sym_eig.register
def _(a: np.ndarray, tol: float = 1e-10) -> Eigh:
    return _symmetric_eigh(a, tol)


def _symmetric_eigh(a: NDArray[np.float64], tol: float) -> Eigh:
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")

    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"sym_eig needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("sym_eig received non-finite entries")

    scale = frobenius(a)
    if scale > 0.0:
        asym = frobenius(a - a.T) / scale
        if asym > SYMMETRY_TOL:
            raise AsymmetryError(asym, SYMMETRY_TOL)

    a = 0.5 * (a + a.T)
    values, vectors = _jacobi_sweeps(a.copy(), scale)

    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    _fix_signs(vectors)

    residual = np.linalg.norm(a @ vectors - vectors * values, axis=0)
    worst = float(residual.max()) if residual.size else 0.0
    if worst > tol * max(scale, np.finfo(float).tiny):
        raise ConvergenceError(
            f"Jacobi eigenpairs miss the residual bound: {worst:.3e} > {tol:.1e}*||A||",
            budget=SWEEP_BUDGET,
        )

    return Eigh(values, vectors)


def _jacobi_sweeps(a: NDArray[np.float64], scale: float):
    """Cyclic-by-row Jacobi; `a` is overwritten."""
    m = a.shape[0]
    v = np.eye(m)

    if m == 1 or scale == 0.0:
        return np.diag(a).copy(), v

    for sweep in range(1, SWEEP_BUDGET + 1):
        # Summed directly; ||A||^2 - ||diag A||^2 cancels below sqrt(eps) ||A||.
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= OFF_DIAGONAL_TOL * scale:
            logger.debug("Jacobi converged after %d sweeps (dim=%d)", sweep - 1, m)
            return np.diag(a).copy(), v

        # Early sweeps only rotate the large elements.
        threshold = 0.2 * off / m**2 if sweep < 4 else 0.0

        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue

                g = 100.0 * abs(apq)
                app, aqq = a[p, p], a[q, q]

                if sweep > 4 and abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    a[p, q] = a[q, p] = 0.0
                    continue

                if abs(apq) <= threshold:
                    continue

                h = aqq - app
                if abs(h) + g == abs(h):
                    t = apq / h
                else:
                    theta = 0.5 * h / apq
                    t = 1.0 / (abs(theta) + np.sqrt(1.0 + theta * theta))
                    if theta < 0.0:
                        t = -t

                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q

                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q

                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    raise ConvergenceError(
        f"Jacobi eigensolver did not converge within {SWEEP_BUDGET} sweeps",
        budget=SWEEP_BUDGET,
    )


def _fix_signs(vectors: NDArray[np.float64]) -> None:
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        significant = np.flatnonzero(np.abs(col) > 1e-10)
        if significant.size and col[significant[0]] < 0.0:
            vectors[:, j] = -col
