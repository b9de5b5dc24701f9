import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sepvar.concircular import (ConcircularTensor, NotOrthogonal, benenti_sequence, char_poly, eigenfunctions,
                                eval_ct, kbdt, sample_sphere, verify_concircular, verify_killing,
                                verify_killing_fd)
from sepvar.pseudo_space import E, parse_space

E2, E21, E3 = E(2), E(2, 1), E(3)


def rr(space):
    return ConcircularTensor(space, np.zeros((space.dim, space.dim)), np.zeros(space.dim), 1.0)


def test_eval_rr():
    np.testing.assert_allclose(eval_ct(rr(E2), [1.0, 2.0]).components, [[1, 2], [2, 4]])


def test_eval_constant():
    A = np.array([[1.0, 0.3], [0.3, -2.0]])
    L = ConcircularTensor(E2, A)
    np.testing.assert_allclose(eval_ct(L, [5.0, -7.0]).components, A)


def test_char_poly_at_lambda1():
    l1, l2, x, y = 1.0, 3.0, 0.5, 0.7
    L = ConcircularTensor(E2, np.diag([l1, l2]), np.zeros(2), 1.0)
    p = np.polyval(char_poly(L, [x, y]), l1)
    assert p == pytest.approx(x * x * (l2 - l1))


def test_char_poly_e21_case3_family():
    l1, l2, t, x = -0.4, 1.3, 0.8, 0.35
    # contravariant A so that the endomorphism is diag(l1, l2)
    L = ConcircularTensor(E21, np.diag([-l1, l2]), np.zeros(2), 1.0)
    ref = [1.0, -(l1 + l2 + x * x - t * t), l1 * l2 + l1 * x * x - l2 * t * t]
    np.testing.assert_allclose(char_poly(L, [t, x]), ref, atol=1e-14)


def test_char_poly_constant():
    L = ConcircularTensor(E2, np.diag([2.0, 5.0]))
    np.testing.assert_allclose(np.roots(char_poly(L, [9.0, -3.0])), [5.0, 2.0])


def test_elliptic_interlacing(rng):
    L = ConcircularTensor(E2, np.diag([1.0, 2.5]), np.zeros(2), 1.0)
    for x in rng.normal(size=(20, 2)):
        u1, u2 = eigenfunctions(L, x).values
        assert 1.0 < u1 < 2.5 < u2


def test_metric_has_one_eigenvalue():
    es = eigenfunctions(ConcircularTensor(E3, np.eye(3)), [0.1, 0.2, 0.3])
    assert len(es.values) == 1 and es.values[0] == pytest.approx(1.0) and es.multiplicities == [3]


def test_complex_elliptic_region_is_not_orthogonal():
    # E2_1 case 5 type: A with a complex pair, point inside |zeta| < sqrt(b)
    L = ConcircularTensor(E21, np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros(2), 1.0)
    with pytest.raises(NotOrthogonal):
        eigenfunctions(L, [0.05, 0.0])


def test_kbdt_examples():
    K = kbdt(ConcircularTensor(E2, np.eye(2)))
    np.testing.assert_allclose(K([0.3, 0.4]), np.eye(2), atol=1e-15)
    x = np.array([0.3, -1.2])
    K = kbdt(rr(E2))
    np.testing.assert_allclose(K(x), (x @ x) * np.eye(2) - np.outer(x, x), atol=1e-14)


def test_kbdt_spectral_map(rng):
    L = ConcircularTensor(E3, np.diag([0.0, 1.0, 3.0]), np.zeros(3), 1.0)
    K = kbdt(L)
    x = rng.normal(size=3)
    Lx = eval_ct(L, x).components
    lam, V = np.linalg.eigh(Lx)
    for l, v in zip(lam, V.T):
        np.testing.assert_allclose(K(x) @ v, (np.trace(Lx) - l) * v, atol=1e-12)


def test_benenti_base_and_first_member():
    L = rr(E2)
    Ks = benenti_sequence(L)
    x = np.array([0.7, -0.2])
    np.testing.assert_allclose(Ks[0](x), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(Ks[1](x), kbdt(L)(x), atol=1e-14)


def _random_ct(rng, sp):
    n = sp.dim
    M = rng.normal(size=(n, n))
    return ConcircularTensor(sp, M + M.T, rng.normal(size=n), float(rng.normal()))


@given(st.integers(0, 10_000), st.integers(2, 4), st.integers(0, 2))
@settings(max_examples=40, deadline=None)
def test_benenti_members_commute_and_are_killing(seed, n, nu):
    rng = np.random.default_rng(seed)
    sp = E(n, min(nu, n))
    L = _random_ct(rng, sp)
    Ks = benenti_sequence(L)
    X = rng.normal(size=(5, n))
    for x in X:
        Lx = eval_ct(L, x).components @ sp.g
        for K in Ks:
            Kx = K(x) @ sp.g
            assert np.abs(Kx @ Lx - Lx @ Kx).max() < 1e-10 * (1 + np.abs(Kx).max() * np.abs(Lx).max())
    for K in Ks:
        assert verify_killing(K, X) < 1e-10


@given(st.integers(0, 10_000), st.integers(2, 4), st.integers(0, 2))
@settings(max_examples=30, deadline=None)
def test_flat_family_is_concircular(seed, n, nu):
    rng = np.random.default_rng(seed)
    sp = E(n, min(nu, n))
    L = _random_ct(rng, sp)
    assert verify_concircular(L, rng.normal(size=(5, n)), h=1e-4) < 1e-8


def test_violation_detectors(rng):
    L = rr(E2)
    X = rng.normal(size=(5, 2))
    eps = 1e-3
    f = lambda x: eval_ct(L, x).components + eps * x[0] ** 3 * np.eye(2)  # noqa: E731
    res = verify_concircular(f, X, space=E2)
    assert 1e-5 < res < 1e-1
    g = lambda x: (1 + 0.5 * x[0]) * np.eye(2)  # noqa: E731
    assert verify_killing_fd(g, E2, X) == pytest.approx(0.5, rel=0.5)


def test_constant_has_zero_alpha(rng):
    L = ConcircularTensor(E3, np.diag([1.0, 2.0, -1.0]))
    assert verify_concircular(L, rng.normal(size=(5, 3))) < 1e-10


@pytest.mark.parametrize("name", ["S2", "dS2"])
def test_sphere_ct_annihilates_radial(name, rng):
    sp = parse_space(name)
    M = rng.normal(size=(3, 3))
    L = ConcircularTensor(sp, M + M.T)
    for p in sample_sphere(sp, rng, 10):
        Lp = eval_ct(L, p).components
        assert np.abs(Lp @ (sp.g @ p)).max() < 1e-10
        assert abs(p @ sp.g @ p - 1.0) < 1e-10


@pytest.mark.parametrize("name", ["S2", "dS2"])
def test_sphere_benenti_killing(name, rng):
    sp = parse_space(name)
    M = rng.normal(size=(3, 3))
    L = ConcircularTensor(sp, M + M.T)
    P = sample_sphere(sp, rng, 10)
    for K in benenti_sequence(L):
        assert verify_killing(K, P) < 1e-8
    assert verify_concircular(L, P, h=1e-4) < 1e-8
