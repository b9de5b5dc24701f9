import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import mjf_trial
from sepvar.canonical_forms import (AmbiguityError, DegenerateNullAxialError, NotSelfAdjoint, classify_ct,
                                    ct_invariants, metric_jordan_form, random_pseudo_orthogonal, reduce_geometric)
from sepvar.concircular import ConcircularTensor, isometry
from sepvar.pseudo_space import E

E2, E21 = E(2), E(2, 1)


def test_identity_in_e21_splits_by_metric_sign():
    spec = metric_jordan_form(np.eye(2), E21)
    assert spec.multiset() == [(1.0, 0.0, 1, -1), (1.0, 0.0, 1, 1)]


def test_single_jordan_block_on_skew_normal_pair():
    lam = 0.4
    # skew-normal basis with g = -S2; in standard (t, x) coordinates
    S = np.array([[0.0, 1.0], [1.0, 0.0]])
    Tc = np.array([[lam, 0.0], [1.0, lam]])
    gc = -S
    vals, V = np.linalg.eigh(gc)
    P = np.diag(np.sqrt(np.abs(vals))) @ V.T
    T = P @ Tc @ np.linalg.inv(P)
    spec = metric_jordan_form(T, E21)
    assert spec.multiset() == [(lam, 0.0, 2, -1)]


def test_not_self_adjoint():
    with pytest.raises(NotSelfAdjoint):
        metric_jordan_form(np.array([[0.0, 1.0], [0.0, 0.0]]), E2)


def test_near_merging_clusters_refused():
    with pytest.raises(AmbiguityError):
        metric_jordan_form(np.diag([1.0, 1.0 + 1e-6]), E2, tol=1e-7)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_conjugation_invariance_small_batch(n):
    rng = np.random.default_rng(n)
    for _ in range(40):
        ok, blocks, got = mjf_trial(rng, n)
        assert ok, (blocks, got)


def test_invariants_examples():
    assert ct_invariants(ConcircularTensor(E2, np.zeros((2, 2)), np.zeros(2), 1.0)) == (0, 1)
    assert ct_invariants(ConcircularTensor(E2, np.zeros((2, 2)), np.array([1.0, 0.0]), 0.0)) == (1, 1)
    assert ct_invariants(ConcircularTensor(E2, np.diag([1.0, 2.0]))) == (None, None)


def test_timelike_axial_sign():
    assert ct_invariants(ConcircularTensor(E21, np.zeros((2, 2)), np.array([1.0, 0.0]), 0.0)) == (1, -1)


def test_classify_examples():
    a2 = 0.7
    assert classify_ct(ConcircularTensor(E21, np.diag([a2, 0.0]), np.zeros(2), 1.0)).tag == "Central"
    assert classify_ct(ConcircularTensor(E2, np.diag([1.0, 0.0]))).tag == "Cartesian"
    # null parabolic web: A = d_eta (x) d_eta, w = d_zeta
    eta = np.array([1.0, 1.0]) / np.sqrt(2)
    zeta = np.array([1.0, -1.0]) / np.sqrt(2)
    c = classify_ct(ConcircularTensor(E21, np.outer(eta, eta), zeta, 0.0))
    assert (c.tag, c.index) == ("NullAxial", 2)


def test_pure_null_w_is_degenerate():
    with pytest.raises(DegenerateNullAxialError):
        classify_ct(ConcircularTensor(E21, np.zeros((2, 2)), np.array([1.0, 1.0]), 0.0))


def test_reduce_scaling_and_shift():
    a, b, shift, Ln = reduce_geometric(ConcircularTensor(E2, 2 * np.eye(2), np.zeros(2), 3.0))
    assert a == pytest.approx(1 / 3) and b == pytest.approx(-2 / 3)
    np.testing.assert_allclose(shift, 0, atol=1e-14)
    assert Ln.m == pytest.approx(1.0)
    np.testing.assert_allclose(Ln.A, 0, atol=1e-14)


def test_central_normalised_with_smallest_eigenvalue_zero():
    L = ConcircularTensor(E21, np.diag([-1.5, 0.5]), np.zeros(2), 1.0)
    Ln = classify_ct(L).normalized_ct
    eig = np.linalg.eigvals(Ln.A @ E21.g)
    assert np.min(np.abs(eig)) < 1e-12


def _random_ct(rng, space):
    n = space.dim
    M = rng.normal(size=(n, n))
    return ConcircularTensor(space, M + M.T, rng.normal(size=n), float(rng.choice([0.0, rng.normal()])))


@given(st.integers(0, 10_000), st.integers(2, 4), st.integers(0, 2))
@settings(max_examples=60, deadline=None)
def test_invariants_are_isometry_invariant(seed, n, nu):
    nu = min(nu, n)
    rng = np.random.default_rng(seed)
    sp = E(n, nu)
    L = _random_ct(rng, sp)
    Q = random_pseudo_orthogonal(sp.g, rng)
    L2 = isometry(L, Q, rng.normal(size=n))
    try:
        assert ct_invariants(L2) == ct_invariants(L)
    except AmbiguityError:
        pass


@given(st.integers(0, 10_000), st.integers(2, 3), st.integers(0, 1))
@settings(max_examples=40, deadline=None)
def test_classification_stable_under_normalisation(seed, n, nu):
    rng = np.random.default_rng(seed)
    L = _random_ct(rng, E(n, nu))
    try:
        c = classify_ct(L)
    except (AmbiguityError, DegenerateNullAxialError):
        return
    c2 = classify_ct(c.normalized_ct)
    assert (c2.tag, c2.index, c2.sign) == (c.tag, c.index, c.sign)
    assert c.tag in {"Central", "NonNullAxial", "NullAxial", "Cartesian"}
