import numpy as np
import pytest

from sepvar import bekm
from sepvar.concircular import ConcircularTensor, benenti_sequence, sample_sphere, verify_killing
from sepvar.potential_dsl import parse_potential
from sepvar.pseudo_space import E, parse_space
from sepvar import web_catalog as wc

CM_BOX = (np.array([0.0, 2.0, 4.0]), 0.5)
CM_CHARTS = {"cylindrical", "spherical", "prolate spheroidal", "oblate spheroidal",
             "rotationally symmetric parabolic"}


@pytest.fixture(scope="module")
def cm():
    V = parse_potential("calogero-moser", None)
    trees = bekm.bekm_separate(V, V.space, box=CM_BOX, exhaustive=True, seed=0)
    return V, {t.name: t for t in trees}


@pytest.fixture(scope="module")
def mt():
    V = parse_potential("morosi-tondo", None)
    return V, bekm.bekm_separate(V, V.space, seed=0)


def test_calogero_five_charts(cm):
    _, trees = cm
    assert set(trees) == CM_CHARTS and len(trees) == 5


def test_tree_shape(cm):
    for t in cm[1].values():
        assert t.resolved and t.leaf_count == 3 and t.depth <= 3
        for node in t.warped:
            s = node.split
            assert s.geodesic_dim + s.fiber.n == 3


def test_cylindrical_restriction_matches_reference_form(cm, rng):
    V, trees = cm
    node = trees["cylindrical"].warped[0]
    split = node.split
    assert split.kind == "axis" and node.child.name == "polar"
    Vr = bekm.restrict_potential(V, split)
    e2 = np.array([1.0, -1.0, 0.0]) / np.sqrt(2)
    e3 = np.array([1.0, 1.0, -2.0]) / np.sqrt(6)
    for y in rng.uniform(0.2, 1.0, size=(10, 2)):
        a, b = e2 @ split.basis @ y, e3 @ split.basis @ y
        ref = 9 * (b * b + a * a) ** 2 / (2 * a * a * (3 * b * b - a * a) ** 2)
        assert Vr.value(y) == pytest.approx(ref, rel=1e-10)


def test_spherical_split_fiber(cm):
    node = cm[1]["spherical"].warped[0]
    assert node.split.kind == "central" and node.split.fiber == parse_space("S2")


def test_constant_potential_restricts_to_constant(cm):
    split = cm[1]["cylindrical"].warped[0].split
    Vr = bekm.restrict_potential(parse_potential("5/2", E(3)), split)
    assert np.allclose(Vr.value(np.random.default_rng(0).normal(size=(5, 2))), 2.5)


def test_norm_squared_restricts_to_radius():
    V = parse_potential("q1^2 + q2^2 + q3^2", E(3))
    L = ConcircularTensor(E(3), np.zeros((3, 3)), np.zeros(3), 1.0)
    x = np.array([0.3, -0.4, 1.2])
    split = bekm.warped_split(L, _tangent(E(3), x), x)
    Vr = bekm.restrict_potential(V, split)
    for y in sample_sphere(split.fiber, np.random.default_rng(1), 5):
        assert Vr.value(y) == pytest.approx(1.0)


def _tangent(sp, x):
    """Columns spanning the g-orthogonal complement of x."""
    _, _, vt = np.linalg.svd((sp.g @ x)[None, :])
    return vt[1:].T


def test_warped_split_examples():
    # timelike axis in E3_1: E1 x E2
    sp = E(3, 1)
    d = np.array([1.0, 0.0, 0.0])
    s = bekm.warped_split(ConcircularTensor(sp, np.outer(d, d)), np.eye(3)[:, 1:], np.array([0.2, 0.5, -0.3]))
    assert s.kind == "axis" and s.fiber == E(2)
    # central split with a spacelike probe: de Sitter fibre
    L = ConcircularTensor(sp, np.zeros((3, 3)), np.zeros(3), 1.0)
    x = np.array([0.2, 1.0, 0.3])
    s = bekm.warped_split(L, _tangent(sp, x), x)
    assert s.kind == "central" and s.fiber == parse_space("dS2")
    x = np.array([1.0, 2.0, 0.5])
    s = bekm.warped_split(ConcircularTensor(E(3), np.zeros((3, 3)), np.zeros(3), 1.0), _tangent(E(3), x), x)
    assert s.fiber == parse_space("S2")


def test_ks_space_is_killing_and_commuting(cm, rng):
    for t in cm[1].values():
        ks = bekm.ks_space(t)
        assert len(ks) == 3
        X = CM_BOX[0] + rng.uniform(-0.5, 0.5, size=(10, 3))
        for K in ks:
            assert verify_killing(K, X) < 1e-8


def test_depth0_ks_is_benenti(cm, rng):
    t = cm[1]["prolate spheroidal"]
    ks, ref = bekm.ks_space(t), benenti_sequence(t.ct)
    x = rng.normal(size=3)
    for K, R in zip(ks, ref):
        np.testing.assert_allclose(K(x), R(x), atol=1e-12)


def test_leaves_diagonalise_level_tensors(cm, rng):
    from sepvar.concircular import eval_ct, kbdt
    t = cm[1]["oblate spheroidal"]
    K = kbdt(t.ct)
    for x in CM_BOX[0] + rng.uniform(-0.5, 0.5, size=(5, 3)):
        F = bekm.tree_frame(t, x)
        for M in (eval_ct(t.ct, x).components, K(x)):
            C = F.T @ M @ F
            off = C - np.diag(np.diag(C))
            assert np.abs(off).max() < 1e-9 * (1 + np.abs(C).max())


def test_morosi_single_null_axial_branch(mt):
    _, tree = mt
    assert tree.resolved and tree.key[0] == "NullAxial" and tree.leaf_count == 3
    _, trees = mt[0], bekm.bekm_separate(mt[0], mt[0].space, exhaustive=True, seed=0)
    assert len(trees) == 1


def test_generic_potential_fails():
    V = parse_potential("q1^2*q2", E(2))
    tree = bekm.bekm_separate(V, E(2))
    assert not tree.resolved and tree.kind == bekm.FAIL


@pytest.mark.parametrize("space,expected", [("E2", 4), ("E2_1", 10)])
def test_zero_potential_covers_catalog(space, expected):
    sp = parse_space(space)
    trees = bekm.bekm_separate(parse_potential("0", sp), sp, exhaustive=True, seed=0)
    cases = {t.chart.case_id for t in trees if t.chart}
    assert len(cases) == expected == len(wc.catalog_list(sp))


def test_dot_output(mt):
    dot = bekm.to_dot(mt[1], "mt")
    assert dot.startswith("digraph mt") and dot.count("->") >= 3
