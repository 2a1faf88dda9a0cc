import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from mvprolate.errors import AsymmetryError, DomainError, ParameterError, SingularMatrixError
from mvprolate.linalg import (
    BlockMat,
    antidiag2,
    diag2,
    mat2,
    mat2_add,
    mat2_inverse,
    mat2_mul,
    mat2_transpose,
    sym_eig,
)

# --- Setup ---

entries = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


def random_symmetric(seed, size):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((size, size))
    return a + a.T


# --- 2x2 blocks ---


def test_block_builders():
    """diag2 and antidiag2 place entries where expected."""
    assert np.array_equal(diag2(1.0, 2.0), [[1.0, 0.0], [0.0, 2.0]])
    assert np.array_equal(antidiag2(4.0, 2.0), [[0.0, 4.0], [2.0, 0.0]])
    assert np.array_equal(mat2_transpose(mat2(1, 2, 3, 4)), [[1, 3], [2, 4]])
    assert np.array_equal(mat2_add(diag2(1.0, 2.0), antidiag2(3.0, 4.0)), [[1, 3], [4, 2]])


def test_nonfinite_block_rejected():
    with pytest.raises(DomainError):
        mat2(1.0, np.nan, 0.0, 1.0)


@given(entries, entries, entries, entries)
def test_inverse_property(a, b, c, d):
    """A A^-1 = I whenever A is not numerically singular."""
    m = mat2(a, b, c, d)
    if abs(a * d - b * c) < 1e-6:
        return
    try:
        inv = mat2_inverse(m)
    except SingularMatrixError:
        return
    cond = np.linalg.cond(m)
    assert np.allclose(mat2_mul(m, inv), np.eye(2), atol=1e-12 * cond)


def test_singular_inverse_reports_determinant():
    with pytest.raises(SingularMatrixError) as info:
        mat2_inverse(mat2(1.0, 2.0, 2.0, 4.0))
    assert info.value.det == 0.0


# --- Block matrices ---


def test_block_layout():
    """Block (w, m) sits at rows 2w..2w+1, columns 2m..2m+1."""
    blocks = np.arange(16.0).reshape(2, 2, 2, 2)
    b = BlockMat.from_blocks(blocks)
    assert b.dim == 4
    assert b.nblocks == 2
    assert np.array_equal(b.block(0, 1), blocks[0, 1])
    assert np.array_equal(b.entries[0:2, 2:4], blocks[0, 1])
    assert np.array_equal(b.blocks(), blocks)


def test_block_matrix_validation():
    with pytest.raises(ParameterError):
        BlockMat(np.eye(3))
    with pytest.raises(DomainError):
        BlockMat(np.full((2, 2), np.inf))


def test_asymmetry():
    assert BlockMat(np.eye(2)).asymmetry() == 0.0
    assert BlockMat(np.zeros((2, 2))).asymmetry() == 0.0
    assert not BlockMat(np.array([[0.0, 1.0], [0.0, 0.0]])).is_symmetric()


# --- Eigensolver ---


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=1, max_value=12))
def test_sym_eig_matches_lapack(seed, size):
    """Eigenvalues agree with LAPACK, eigenpairs satisfy the residual bound."""
    a = random_symmetric(seed, size)
    values, vectors = sym_eig(a)

    assert np.allclose(values, np.linalg.eigvalsh(a), atol=1e-10 * np.linalg.norm(a))
    assert np.all(np.diff(values) >= 0)
    assert np.allclose(vectors.T @ vectors, np.eye(size), atol=1e-10)
    assert np.linalg.norm(a @ vectors - vectors * values) <= 1e-9 * np.linalg.norm(a)


def test_sign_convention():
    """The first significant component of every eigenvector is positive."""
    values, vectors = sym_eig(random_symmetric(7, 6))
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        first = col[np.abs(col) > 1e-10][0]
        assert first > 0


def test_degenerate_spectrum():
    """Repeated eigenvalues still give an orthonormal basis."""
    a = np.diag([2.0, 2.0, 5.0])
    values, vectors = sym_eig(a)
    assert np.allclose(values, [2.0, 2.0, 5.0])
    assert np.allclose(vectors.T @ vectors, np.eye(3))


def test_zero_matrix():
    values, vectors = sym_eig(np.zeros((3, 3)))
    assert np.array_equal(values, np.zeros(3))
    assert np.array_equal(vectors, np.eye(3))


def test_asymmetric_input_rejected():
    with pytest.raises(AsymmetryError) as info:
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
    assert info.value.asymmetry > 1e-10


def test_bad_input_rejected():
    with pytest.raises(ParameterError):
        sym_eig(np.ones((2, 3)))
    with pytest.raises(ParameterError):
        sym_eig(np.eye(2), tol=0.0)


def test_tiny_off_diagonal_mass_converges():
    """Off-diagonal entries near sqrt(eps) ||A|| are still rotated away."""
    a = random_symmetric(1, 3)
    values, vectors = sym_eig(a)
    assert np.allclose(values, np.linalg.eigvalsh(a), atol=1e-12 * np.linalg.norm(a))

    nearly_diagonal = np.diag([1.0, 2.0, 3.0])
    nearly_diagonal[0, 1] = nearly_diagonal[1, 0] = 1.4e-9
    values, vectors = sym_eig(nearly_diagonal)
    assert np.linalg.norm(nearly_diagonal @ vectors - vectors * values) <= 1e-12


@pytest.mark.parametrize("size", [12, 43, 60])
def test_tridiagonal_jacobi_matrix(size):
    """The Golub-Welsch matrix for Legendre nodes, at the orders quadrature uses."""
    k = np.arange(1, size)
    off = k / np.sqrt(4.0 * k * k - 1.0)
    a = np.diag(off, 1) + np.diag(off, -1)
    values, vectors = sym_eig(a)
    assert np.allclose(values, np.polynomial.legendre.leggauss(size)[0], atol=1e-12)
    assert np.allclose(vectors.T @ vectors, np.eye(size), atol=1e-10)
