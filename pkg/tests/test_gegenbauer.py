import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import polynomial as P
from scipy.special import eval_gegenbauer
from mvprolate.errors import ParameterError
from mvprolate.gegenbauer import gegenbauer, gegenbauer_coeffs


def test_known_value():
    """C_2^{5/2}(0.4) = 2 lam (lam + 1) x^2 - lam = 0.3."""
    assert gegenbauer(2, 2.5, 0.4) == pytest.approx(0.3, abs=1e-15)


def test_low_degrees():
    assert gegenbauer(0, 1.5, 0.7) == 1.0
    assert gegenbauer(1, 1.5, 0.7) == pytest.approx(2.1)
    assert gegenbauer(-1, 1.5, 0.7) == 0.0
    assert gegenbauer(-2, 1.5, 0.7) == 0.0


@given(
    st.integers(min_value=0, max_value=25),
    st.floats(min_value=0.1, max_value=6.0),
    st.floats(min_value=-1.0, max_value=1.0),
)
def test_matches_scipy(w, lam, x):
    """The recursion agrees with scipy's evaluation."""
    expected = eval_gegenbauer(w, lam, x)
    size = eval_gegenbauer(w, lam, 1.0)
    assert gegenbauer(w, lam, x) == pytest.approx(expected, rel=1e-10, abs=1e-11 * size)


def test_array_input():
    x = np.linspace(-1.0, 1.0, 5)
    values = gegenbauer(3, 2.0, x)
    assert values.shape == (5,)
    assert np.allclose(values, eval_gegenbauer(3, 2.0, x))


@pytest.mark.parametrize("w", [0, 1, 2, 5, 10])
@pytest.mark.parametrize("lam", [0.5, 2.5, 3.5])
def test_coefficients_reproduce_values(w, lam):
    """The power coefficients evaluate to the same polynomial."""
    coeffs = gegenbauer_coeffs(w, lam)
    assert coeffs.shape == (w + 1,)
    x = np.linspace(-1.0, 1.0, 9)
    assert np.allclose(P.polyval(x, coeffs), gegenbauer(w, lam, x), rtol=1e-10, atol=1e-9)


def test_coefficients_parity():
    """C_w^lam has the parity of w."""
    coeffs = gegenbauer_coeffs(6, 1.5)
    assert np.all(coeffs[1::2] == 0.0)
    assert gegenbauer_coeffs(-1, 1.5).size == 0


@pytest.mark.parametrize("w, lam", [(1.5, 1.0), (-3, 1.0), (2, 0.0), (2, -0.25), (2, -1.0)])
def test_invalid_arguments(w, lam):
    with pytest.raises(ParameterError):
        gegenbauer(w, lam, 0.0)
