import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from sepvar.potential_dsl import (DSLError, ParseError, differentiate, evaluate, fd_check, parse_expr,
                                  parse_potential, to_string)
from sepvar.pseudo_space import E

E3, E31 = E(3), E(3, 1)


def test_calogero_builtin_matches_expression(rng):
    V = parse_potential("calogero-moser", None)
    W = parse_potential("(q1-q2)^-2 + (q2-q3)^-2 + (q1-q3)^-2", E3)
    X = rng.normal(size=(20, 3))
    np.testing.assert_allclose(V.value(X), W.value(X), rtol=1e-15)
    assert V.value([0.0, 1.0, 2.0]) == pytest.approx(2.25)


def test_morosi_aliases(rng):
    V = parse_potential("-5/8*mu^4 + 5/2*mu^2*nu + 1/2*mu*y^2 - 1/2*nu^2", E31)
    for t, x, y in rng.normal(size=(10, 3)):
        mu, nu = (x - t) / np.sqrt(2), (t + x) / np.sqrt(2)
        ref = -5 / 8 * mu ** 4 + 5 / 2 * mu ** 2 * nu + 0.5 * mu * y * y - 0.5 * nu * nu
        assert V.value([t, x, y]) == pytest.approx(ref, rel=1e-13, abs=1e-14)


def test_lightlike_alias_normalisation():
    # <d_mu, d_nu> = 1 means d_mu and d_nu are null and pair to one
    g = E31.g
    dmu = np.array([-1, 1, 0]) / np.sqrt(2)
    dnu = np.array([1, 1, 0]) / np.sqrt(2)
    assert dmu @ g @ dnu == pytest.approx(1.0)
    V = parse_potential("mu", E31)
    assert V.grad([0.0, 0.0, 0.0]) @ (g @ dmu) == pytest.approx(0.0, abs=1e-15)


def test_zero_potential():
    V = parse_potential("0", E(2))
    assert V.value([1.0, 2.0]) == 0.0
    assert np.all(V.grad([1.0, 2.0]) == 0)


def test_power_rule():
    d = differentiate(parse_expr("(q1-q2)^-2", E3), 0)
    assert to_string(d) == "-2 * (q1 - q2)^-3"


def test_derivative_of_constant():
    assert to_string(differentiate(parse_expr("7/3", E3), 1)) == "0"


@pytest.mark.parametrize("name", ["calogero-moser", "morosi-tondo"])
def test_analytic_derivatives_vs_fd(name, rng):
    V = parse_potential(name, None)
    # calogero-moser: stay a unit away from the collision planes
    if name == "calogero-moser":
        X = np.array([0.0, 2.0, 4.0]) + rng.uniform(-0.5, 0.5, size=(50, 3))
    else:
        X = rng.uniform(-1, 1, size=(50, 3))
    assert fd_check(V, X) < 1e-8


@pytest.mark.parametrize("src", ["q1+", "q1^0.3", "foo(q1)", "q9", "(q1", "q1 +* 2"])
def test_parse_errors(src):
    with pytest.raises(DSLError):
        parse_expr(src, E3)


def test_parse_error_has_position():
    with pytest.raises(ParseError, match="column"):
        parse_expr("q1 + * q2", E3)


def test_half_integer_and_functions(rng):
    a = parse_expr("q1^(3/2) + exp(q2)*sin(q3) + log(q1)", E3)
    X = rng.uniform(0.5, 2, size=(5, 3))
    ref = X[:, 0] ** 1.5 + np.exp(X[:, 1]) * np.sin(X[:, 2]) + np.log(X[:, 0])
    np.testing.assert_allclose(evaluate(a, X), ref, rtol=1e-14)


# -- random small expression trees --------------------------------------------

leaf = st.sampled_from(["q1", "q2", "q3", "2", "1/3", "(q1+3)"])


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(children, st.sampled_from(["2", "3", "-1"])).map(lambda t: f"({t[0]})^{t[1]}"),
        children.map(lambda c: f"sin({c})"),
        children.map(lambda c: f"exp({c} / 5)"),
    )


exprs = st.recursive(leaf, _combine, max_leaves=6)
points = st.lists(st.floats(0.2, 1.5), min_size=3, max_size=3)


@given(exprs)
@settings(max_examples=80, deadline=None)
def test_print_parse_fixpoint(src):
    a = parse_expr(src, E3)
    b = parse_expr(to_string(a), E3)
    assert b == a


@given(exprs, points)
@settings(max_examples=60, deadline=None)
def test_gradient_matches_fd(src, x):
    V = parse_potential(src, E3)
    x = np.array(x)
    with np.errstate(all="ignore"):
        v = V.value(x)
    assume(np.isfinite(v) and abs(v) < 1e6)
    assert fd_check(V, x[None, :]) < 1e-6


@given(exprs, exprs, points)
@settings(max_examples=40, deadline=None)
def test_linearity_and_product_rule(f, g, x):
    x = np.array(x)[None, :]
    F, G = parse_expr(f, E3), parse_expr(g, E3)
    with np.errstate(all="ignore"):
        vals = [evaluate(a, x) for a in (F, G)]
    assume(all(np.all(np.isfinite(v)) and np.abs(v).max() < 1e6 for v in vals))
    dF, dG = evaluate(differentiate(F, 0), x), evaluate(differentiate(G, 0), x)
    lin = evaluate(differentiate(parse_expr(f"({f}) + 3*({g})", E3), 0), x)
    prod = evaluate(differentiate(parse_expr(f"({f})*({g})", E3), 0), x)
    scale = 1 + np.abs(dF).max() + np.abs(dG).max() + np.abs(vals).max() ** 2
    assert np.abs(lin - (dF + 3 * dG)).max() < 1e-9 * scale
    assert np.abs(prod - (dF * vals[1] + vals[0] * dG)).max() < 1e-9 * scale
