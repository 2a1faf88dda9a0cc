import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from mvprolate.errors import ParameterError
from mvprolate.families import (
    christoffel_darboux_grid,
    christoffel_darboux_residual,
    explicit_power_coeffs,
    gegenbauer_power_coeffs,
    gram_deviation,
    monic_rw,
    norm_closed_form,
    norm_matrix,
    norm_ratio_table,
    norm_squared,
    orthonormal_qw,
    orthonormal_recursion_residual,
    recursion_consistency,
    recursion_matrices,
    recursion_residual,
    recursion_route_distance,
    route_agreement,
)
from mvprolate.matpoly import Params

PARAMS = Params(4, 1)

# Parameter pairs with 0 < p < n, including a balanced one and n < 2.
param_pairs = st.sampled_from([(4, 1), (3, 1.2), (5, 2.5), (1.5, 0.5), (7, 6)])


# --- Recursion coefficients ---


def test_first_recursion_matrices():
    """B_0 = antidiag(-1/2, -1/4) and A_1 = diag(5/56, 9/56) for n=4, p=1."""
    a0, b0 = recursion_matrices(0, PARAMS)
    assert np.array_equal(a0, np.zeros((2, 2)))
    assert np.allclose(b0, [[0.0, -0.5], [-0.25, 0.0]])

    a1, _ = recursion_matrices(1, PARAMS)
    assert np.allclose(a1, np.diag([5 / 56, 9 / 56]))


def test_low_degree_polynomials():
    """R_1 = [[x, 1/2], [1/4, x]] and R_2 = [[x^2 - 1/21, 2x/3], [2x/5, x^2 - 3/35]]."""
    x = np.linspace(-1.0, 1.0, 5)

    r1 = monic_rw(1, PARAMS)(x)
    assert np.allclose(r1[:, 0, 0], x)
    assert np.allclose(r1[:, 0, 1], 0.5)
    assert np.allclose(r1[:, 1, 0], 0.25)

    r2 = monic_rw(2, PARAMS)(x)
    assert np.allclose(r2[:, 0, 0], x**2 - 1 / 21)
    assert np.allclose(r2[:, 0, 1], 2 * x / 3)
    assert np.allclose(r2[:, 1, 0], 2 * x / 5)
    assert np.allclose(r2[:, 1, 1], x**2 - 3 / 35)


@pytest.mark.parametrize("w", [0, 1, 5, 12, 20, 30])
def test_monic(w):
    r = monic_rw(w, PARAMS)
    assert r.degree == w
    assert np.allclose(r.leading(), np.eye(2), atol=1e-12)


def test_explicit_coefficients_low_degree():
    coeffs = explicit_power_coeffs(1, PARAMS)
    assert np.allclose(coeffs[0], [[0.0, 0.5], [0.25, 0.0]])
    assert np.allclose(coeffs[1], np.eye(2))


def test_invalid_degree():
    with pytest.raises(ParameterError):
        monic_rw(-1, PARAMS)
    with pytest.raises(ParameterError):
        recursion_matrices(1.5, PARAMS)


# --- The three construction routes agree ---


@settings(max_examples=20, deadline=None)
@given(param_pairs, st.integers(min_value=0, max_value=12))
def test_routes_agree(pair, w):
    """Gegenbauer, explicit and recursion constructions give the same R_w."""
    params = Params(*pair)
    assert route_agreement(w, params) <= 1e-9
    assert recursion_route_distance(w, params) <= 1e-9
    assert recursion_residual(w, params) <= 1e-10


@pytest.mark.parametrize("pair", [(4, 1), (3, 1.2)])
def test_routes_agree_to_degree_20(pair):
    params = Params(*pair)
    for w in range(21):
        assert route_agreement(w, params) <= 1e-12
        assert recursion_route_distance(w, params) <= 1e-9
        assert recursion_residual(w, params) <= 1e-9


def test_gegenbauer_route_low_degree():
    assert np.allclose(gegenbauer_power_coeffs(2, PARAMS), explicit_power_coeffs(2, PARAMS))


# --- Norms ---


def test_norms_n4_p1():
    """||R_0||^2 = diag(64/15, 32/15), ||R_1||^2 = diag(8/21, 12/35)."""
    assert np.allclose(norm_squared(0, PARAMS), np.diag([64 / 15, 32 / 15]), atol=1e-13)
    assert np.allclose(norm_squared(1, PARAMS), np.diag([8 / 21, 12 / 35]), atol=1e-13)


def test_norm_cache_is_protected():
    """Callers get copies of the cached norm."""
    first = norm_squared(2, PARAMS)
    first[0, 0] = -1.0
    assert norm_squared(2, PARAMS)[0, 0] > 0


def test_closed_form_norm_is_off_by_a_varying_factor():
    """The closed form is diag(64/375, 32/375) at w=0; its ratio to the true norm is 25 at w=0, 1 at w=1."""
    assert np.allclose(norm_closed_form(0, PARAMS), np.diag([64 / 375, 32 / 375]))
    assert np.allclose(norm_matrix(0, PARAMS).ratio, [25.0, 25.0])
    assert np.allclose(norm_matrix(1, PARAMS).ratio, [1.0, 1.0])

    table = norm_ratio_table(PARAMS, w_max=6)
    assert len(table["rows"]) == 7
    assert not table["w_independent"]


@pytest.mark.parametrize("pair", [(4, 1), (3, 1.2), (5, 2.5)])
def test_orthonormality(pair):
    """<Q_w, Q_m> = delta_wm I up to degree 10."""
    assert gram_deviation(10, Params(*pair)) <= 1e-10


@pytest.mark.parametrize("pair, tol", [((4, 1), 1e-10), ((3, 1.2), 1e-9)])
def test_orthonormality_to_degree_20(pair, tol):
    assert gram_deviation(20, Params(*pair)) <= tol


@pytest.mark.parametrize("w", [0, 1, 4, 9])
def test_recursion_consistency(w):
    """A_w = ||R_w||^2 ||R_{w-1}||^-2 and B_w ||R_w||^2 is symmetric."""
    assert recursion_consistency(w, PARAMS) <= 1e-10


# --- Orthonormal recursion and Christoffel-Darboux ---


@pytest.mark.parametrize("w", [0, 1, 3, 10])
def test_orthonormal_recursion(w):
    assert orthonormal_recursion_residual(w, PARAMS) <= 1e-10


@pytest.mark.parametrize("x, y", [(0.5, 0.1), (0.6, -0.3), (-0.9, 0.7), (0.2, 0.2)])
@pytest.mark.parametrize("w", [1, 4, 8])
def test_christoffel_darboux(w, x, y):
    assert christoffel_darboux_residual(w, x, y, PARAMS) <= 1e-10


@pytest.mark.parametrize("pair", [(4, 1), (3, 1.2)])
def test_recursion_and_christoffel_darboux_to_degree_20(pair):
    """Both identities on the 32-point grid of [-1, 1], every w <= 20."""
    params = Params(*pair)
    for w in range(21):
        assert orthonormal_recursion_residual(w, params) <= 1e-9
        if w >= 1:
            assert christoffel_darboux_grid(w, params) <= 1e-9


def test_christoffel_darboux_needs_positive_degree():
    with pytest.raises(ParameterError):
        christoffel_darboux_residual(0, 0.1, 0.2, PARAMS)


def test_orthonormal_family_evaluates():
    q = orthonormal_qw(3, PARAMS)
    assert q.degree == 3
    assert q(np.array([0.0, 0.5])).shape == (2, 2, 2)


def test_first_polynomial_value():
    assert np.allclose(monic_rw(1, PARAMS)(0.5), [[0.5, 0.5], [0.25, 0.5]])
