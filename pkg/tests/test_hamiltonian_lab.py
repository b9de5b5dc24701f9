import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sepvar import bekm, hamiltonian_lab as hl
from sepvar.concircular import ConcircularTensor, KillingTensorField, benenti_sequence
from sepvar.potential_dsl import parse_potential
from sepvar.pseudo_space import E

CM_BOX = (np.array([0.0, 2.0, 4.0]), 0.5)


@pytest.fixture(scope="module")
def cm():
    V = parse_potential("calogero-moser", None)
    trees = {t.name: t for t in bekm.bekm_separate(V, V.space, box=CM_BOX, exhaustive=True, seed=0)}
    return V, trees


@pytest.fixture(scope="module")
def mt():
    V = parse_potential("morosi-tondo", None)
    tree = bekm.bekm_separate(V, V.space, seed=0)
    return V, tree, hl.first_integrals(bekm.ks_space(tree), V)


def test_hamiltonian_values():
    H = hl.hamiltonian(parse_potential("0", E(2)), E(2))
    assert H.value([0.3, 0.1], [1.0, 0.0]) == pytest.approx(0.5)
    H = hl.hamiltonian(parse_potential("0", E(2, 1)), E(2, 1))
    assert H.value([0.3, 0.1], [1.0, 1.0]) == 0.0
    V = parse_potential("calogero-moser", None)
    assert hl.hamiltonian(V, V.space).value([0.0, 1.0, 2.0], [0.0, 0.0, 0.0]) == pytest.approx(2.25)


def test_self_bracket_is_zero(mt):
    _, _, Fs = mt
    z = hl.PhasePoint([0.1, 0.2, 0.3], [0.5, -0.2, 0.7])
    for F in Fs:
        assert hl.poisson_bracket(F, F, z) == 0.0


def test_morosi_brackets(mt, rng):
    _, _, Fs = mt
    assert len(Fs) == 3
    for _ in range(20):
        z = hl.PhasePoint(rng.uniform(-1, 1, 3), rng.normal(size=3))
        for i in range(3):
            for j in range(i + 1, 3):
                assert abs(hl.poisson_bracket(Fs[i], Fs[j], z)) < 1e-6


def _free_integrals(seed, n=3, nu=1):
    rng = np.random.default_rng(seed)
    sp = E(n, nu)
    M = rng.normal(size=(n, n))
    L = ConcircularTensor(sp, M + M.T, rng.normal(size=n), float(rng.normal()))
    V = parse_potential("0", sp)
    return sp, [hl.FirstIntegral(K, V, False, f"K{i}") for i, K in enumerate(benenti_sequence(L))], rng


def _fd_bracket(F, G, q, p, h=1e-6):
    def grad(fun):
        out = np.empty(2 * len(q))
        for i in range(2 * len(q)):
            e = np.zeros(2 * len(q))
            e[i] = h
            zp, zm = np.concatenate([q, p]) + e, np.concatenate([q, p]) - e
            n = len(q)
            out[i] = (fun(zp[:n], zp[n:]) - fun(zm[:n], zm[n:])) / (2 * h)
        return out
    n = len(q)
    gF, gG = grad(F.kinetic), grad(G.kinetic)
    return gF[:n] @ gG[n:] - gF[n:] @ gG[:n]


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_bracket_antisymmetry_and_fd_agreement(seed):
    sp, Fs, rng = _free_integrals(seed)
    z = hl.PhasePoint(rng.normal(size=3), rng.normal(size=3))
    F, G = Fs[1], Fs[2]
    a, b = hl.poisson_bracket(F, G, z), hl.poisson_bracket(G, F, z)
    assert abs(a + b) < 1e-12 * (1 + abs(a))
    assert a == pytest.approx(_fd_bracket(F, G, z.q, z.p), abs=1e-6 * (1 + abs(a)))


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_bracket_leibniz(seed):
    # {F, G H} = {F, G} H + G {F, H}, with the product's derivatives built by hand
    sp, Fs, rng = _free_integrals(seed)
    q, p = rng.normal(size=3), rng.normal(size=3)
    z = hl.PhasePoint(q, p)
    F, G, H = Fs
    g, h = G.kinetic(q, p), H.kinetic(q, p)
    prod_q = g * H.grad_q(q, p) + h * G.grad_q(q, p)
    prod_p = g * H.grad_p(q, p) + h * G.grad_p(q, p)
    lhs = F.grad_q(q, p) @ prod_p - F.grad_p(q, p) @ prod_q
    rhs = hl.poisson_bracket(F, G, z) * h + g * hl.poisson_bracket(F, H, z)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(lhs)))


def test_free_particle_straight_line():
    sp = E(2, 1)
    H = hl.hamiltonian(parse_potential("0", sp), sp)
    q0, p0 = np.array([0.2, -0.5]), np.array([0.7, 0.3])
    tr = hl.integrate_trajectory(H, hl.PhasePoint(q0, p0), 2.0, 1e-3)
    ref = q0[None, :] + tr.t[:, None] * (sp.ginv @ p0)[None, :]
    assert np.abs(tr.Q - ref).max() < 1e-10


def test_harmonic_energy_drift():
    sp = E(2)
    H = hl.hamiltonian(parse_potential("1/2*(q1^2 + q2^2)", sp), sp)
    tr = hl.integrate_trajectory(H, hl.PhasePoint([1.0, 0.0], [0.0, 0.5]), 10.0, 1e-3)
    assert hl.conservation_drift(H, tr) < 1e-8


def test_calogero_conservation(cm):
    V, trees = cm
    Fs = hl.first_integrals(bekm.ks_space(trees["spherical"]), V)
    tr = hl.integrate_trajectory(Fs[0], hl.PhasePoint([0.1, 2.0, 3.9], [0.2, -0.1, 0.15]), 5.0, 1e-3)
    assert not tr.truncated
    for F in Fs:
        assert hl.conservation_drift(F, tr) < 1e-6


def test_singularity_truncates():
    sp = E(1)
    # the particle leaves the domain of sqrt at q1 = 0 shortly after t = 0.5
    H = hl.hamiltonian(parse_potential("sqrt(q1)/1000", sp), sp)
    tr = hl.integrate_trajectory(H, hl.PhasePoint([0.5], [-1.0]), 5.0, 1e-3)
    assert tr.truncated and 0.4 < tr.t[-1] < 0.6


def test_trajectory_csv():
    sp = E(2)
    H = hl.hamiltonian(parse_potential("0", sp), sp)
    csv = hl.integrate_trajectory(H, hl.PhasePoint([0, 0], [1, 0]), 0.1, 1e-2, record_every=5).to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "t,q1,q2,p1,p2" and len(lines) == 4


def test_independence(mt, rng):
    _, _, Fs = mt
    z = hl.PhasePoint(rng.uniform(-1, 1, 3), rng.normal(size=3))
    assert hl.independence_sigma(Fs, z) > 1e-6


@pytest.mark.parametrize("name", ["spherical", "cylindrical", "prolate spheroidal"])
def test_witness_passes_calogero(cm, name):
    V, trees = cm
    assert hl.separation_witness(trees[name], V)["ok"]


def test_witness_passes_morosi(mt):
    V, tree, _ = mt
    assert hl.separation_witness(tree, V)["ok"]


def test_witness_negative_control(cm):
    V, trees = cm
    wrong = lambda x: bekm.tree_frame(trees["cylindrical"], x)  # noqa: E731
    rep = hl.separation_witness(trees["spherical"], V, frame=wrong)
    assert not rep["ok"] and rep["chkt_offdiag"] > 1e-3
