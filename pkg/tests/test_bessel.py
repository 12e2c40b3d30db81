import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import jv

from metareactor.bessel import bessel_j, j0, j1, j2

finite = st.floats(-60, 60, allow_nan=False)


def envelope(z):
    return np.sqrt(2 / (np.pi * max(abs(z), 1.0))) * np.exp(abs(z.imag))


@settings(max_examples=300, deadline=None)
@given(finite, finite)
def test_matches_reference_implementation(x, y):
    z = complex(x, y)
    for n in (0, 1, 2):
        ref = jv(n, z)
        assert abs(bessel_j(n, z) - ref) <= 1e-11 * envelope(z)


@settings(max_examples=200, deadline=None)
@given(finite, finite)
def test_recurrence(x, y):
    z = complex(x, y)
    if abs(z) < 1e-3:
        return
    lhs = j2(z)
    rhs = 2 * j1(z) / z - j0(z)
    assert abs(lhs - rhs) <= 1e-10 * envelope(z) * max(1.0, 1 / abs(z))


def test_first_zero_of_j0():
    assert abs(j0(2.404825557695773)) < 1e-14


def test_small_argument_limits():
    assert j0(0) == 1
    assert j1(0) == 0
    assert abs(j1(1e-8) - 5e-9) < 1e-20


def test_kelvin_argument_on_principal_diagonal():
    # ber/bei values at x = 1: J0(x e^{3 pi i / 4}) = ber x + i bei x
    z = np.exp(3j * np.pi / 4)
    val = j0(z)
    assert abs(val.real - 0.98438178) < 1e-8
    assert abs(val.imag - 0.24956604) < 1e-8


def test_array_input_shape():
    z = np.linspace(0, 30, 7).reshape(7, 1) * (1 - 1j)
    out = bessel_j(1, z)
    assert out.shape == (7, 1)
    np.testing.assert_allclose(out, jv(1, z), rtol=1e-10, atol=1e-300)


def test_rejects_unsupported_order():
    with pytest.raises(ValueError):
        bessel_j(3, 1.0)


def test_scaled_values_survive_large_imaginary_part():
    z = 3000 * (1 - 1j)
    s0 = bessel_j(0, z, scaled=True)
    s2 = bessel_j(2, z, scaled=True)
    assert np.isfinite(s0) and np.isfinite(s2)
    # deep in the lower half plane J1/J0 -> -i, so J2/J0 = 2 J1/(z J0) - 1 -> -1 - 2i/z
    assert s2 / s0 == pytest.approx(-1 - 2j / z, rel=1e-6)
    ref = jv(0, 30 * (1 - 1j)) * np.exp(-30)
    assert bessel_j(0, 30 * (1 - 1j), scaled=True) == pytest.approx(ref, rel=1e-12)
