import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from sepvar.elliptic import complete_elliptic_K, jacobi, jacobi_elliptic


def test_values_at_zero():
    v = jacobi_elliptic(0.0, 0.5)
    assert (v.sn, v.cn, v.dn) == (0.0, 1.0, 1.0)


def test_degenerate_modulus():
    u = np.linspace(-3, 3, 41)
    np.testing.assert_allclose(jacobi_elliptic(u, 0.0).sn, np.sin(u), atol=1e-15)
    assert complete_elliptic_K(1e-12) == pytest.approx(np.pi / 2, abs=1e-12)


@pytest.mark.parametrize("a", [0.3, 0.7, 0.95])
def test_identities_over_four_periods(a):
    K = complete_elliptic_K(a)
    u = np.linspace(0, 4 * K, 1000)
    v = jacobi_elliptic(u, a)
    assert np.abs(v.sn ** 2 + v.cn ** 2 - 1).max() < 1e-12
    assert np.abs(v.dn ** 2 + a * a * v.sn ** 2 - 1).max() < 1e-12
    assert abs(jacobi_elliptic(K, a).sn - 1) < 1e-10


@pytest.mark.parametrize("a", [0.1, 0.5, 0.9, 0.999])
def test_against_scipy_oracle(a):
    # scipy parameterises by m = a^2
    assert complete_elliptic_K(a) == pytest.approx(special.ellipk(a * a), rel=1e-13)
    u = np.linspace(-7, 7, 301)
    sn, cn, dn, _ = special.ellipj(u, a * a)
    v = jacobi_elliptic(u, a)
    np.testing.assert_allclose(v.sn, sn, atol=1e-12)
    np.testing.assert_allclose(v.cn, cn, atol=1e-12)
    np.testing.assert_allclose(v.dn, dn, atol=1e-12)


def test_quotients():
    u, a = 0.7, 0.6
    v = jacobi_elliptic(u, a)
    assert jacobi("sc", u, a) == pytest.approx(v.sn / v.cn)
    assert jacobi("nd", u, a) == pytest.approx(1 / v.dn)
    assert jacobi("cd", u, a) == pytest.approx(v.cn / v.dn)


def test_bad_modulus():
    with pytest.raises(ValueError):
        complete_elliptic_K(1.0)


@given(st.floats(-20, 20), st.floats(0.01, 0.99))
@settings(max_examples=80, deadline=None)
def test_identity_property(u, a):
    v = jacobi_elliptic(u, a)
    assert abs(v.sn ** 2 + v.cn ** 2 - 1) < 1e-12
    assert abs(v.dn ** 2 + a * a * v.sn ** 2 - 1) < 1e-12
