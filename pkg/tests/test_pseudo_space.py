import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sepvar.pseudo_space import (E, PseudoSpace, SpaceError, SymTensor2, lightlike_coords, parse_space,
                                 raise_lower, scalar_product, sphere, sym_product)


def test_timelike_axis_is_negative():
    assert scalar_product([1, 0], [1, 0], E(2, 1)) == -1.0


def test_zero_vector_pairs_to_zero():
    assert scalar_product([0, 0, 0], [3, -1, 2], E(3, 1)) == 0.0


def test_null_vector_in_e31():
    assert scalar_product([1, 1, 0], [1, 1, 0], E(3, 1)) == 0.0


def test_dimension_mismatch():
    with pytest.raises(Exception):
        scalar_product([1, 0], [1, 0, 0], E(2))


def test_sym_product_examples():
    np.testing.assert_array_equal(sym_product([1, 0], [1, 0]).components, [[1, 0], [0, 0]])
    np.testing.assert_array_equal(sym_product([1, 0], [0, 1]).components, [[0, 0.5], [0.5, 0]])
    x, y = 1.5, -2.0
    np.testing.assert_allclose(sym_product([x, y], [x, y]).components, [[x * x, x * y], [x * y, y * y]])
    assert sym_product([1, 0], [0, 1]).variance == "contravariant"


@pytest.mark.parametrize("tx,expected", [((1, 1), (0, np.sqrt(2))), ((0, 0), (0, 0)), ((1, -1), (np.sqrt(2), 0))])
def test_lightlike_coords(tx, expected):
    np.testing.assert_allclose(lightlike_coords(tx), expected, atol=1e-15)


def test_lowering_identity_gives_metric():
    sp = E(3, 1)
    low = raise_lower(SymTensor2(np.eye(3), "endomorphism"), "covariant", sp)
    np.testing.assert_array_equal(low.components, sp.g)


def test_euclidean_raise_is_identity():
    sp = E(3)
    A = np.array([[1.0, 2, 0], [2, 3, 1], [0, 1, 5]])
    up = raise_lower(SymTensor2(A, "covariant"), "contravariant", sp)
    np.testing.assert_array_equal(up.components, A)


def test_endomorphism_to_covariant_in_e21():
    sp = E(2, 1)
    low = raise_lower(SymTensor2(np.diag([2.0, 3.0]), "endomorphism"), "covariant", sp)
    np.testing.assert_array_equal(low.components, np.diag([-2.0, 3.0]))


def test_parse_space_names():
    assert parse_space("E3_1") == E(3, 1)
    assert parse_space("dS2") == sphere(2, 1, 1.0)
    assert parse_space("E2").g.tolist() == [[1, 0], [0, 1]]
    with pytest.raises(SpaceError):
        parse_space("H7")


def test_sphere_is_extrinsic():
    ds2 = parse_space("dS2")
    assert ds2.is_sphere and ds2.n == 2 and ds2.dim == 3
    assert ds2.g.shape == (3, 3)


vec3 = st.lists(st.floats(-10, 10), min_size=3, max_size=3)


@given(vec3, vec3, vec3, st.floats(-5, 5), st.integers(0, 3))
@settings(max_examples=60, deadline=None)
def test_scalar_product_symmetric_bilinear(x, y, z, a, nu):
    sp = E(3, nu)
    x, y, z = map(np.array, (x, y, z))
    assert scalar_product(x, y, sp) == pytest.approx(scalar_product(y, x, sp))
    lhs = scalar_product(a * x + z, y, sp)
    rhs = a * scalar_product(x, y, sp) + scalar_product(z, y, sp)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(lhs)))


@given(st.lists(st.floats(-10, 10), min_size=9, max_size=9), st.integers(0, 3),
       st.sampled_from(["covariant", "contravariant"]))
@settings(max_examples=60, deadline=None)
def test_raise_lower_roundtrip(vals, nu, var):
    sp = E(3, nu)
    M = np.array(vals).reshape(3, 3)
    T = SymTensor2(M + M.T, var)
    other = "contravariant" if var == "covariant" else "covariant"
    back = raise_lower(raise_lower(T, other, sp), var, sp)
    assert np.abs(back.components - T.components).max() < 1e-14
