"""Executable catalog of the orthogonal separable webs of E2, E2_1, dS2 and AdS2.

Every chart is a forward map (u, v) -> ambient point, the diagonal metric
factors (g_uu, g_vv) it pulls back to, its coordinate ranges and the
concircular tensor that it diagonalizes.  A case may have several regions;
each region is one base formula composed with a fixed reflection of the
ambient axes (the sign table below).  Within a region a chart covers one
fundamental piece; the rest follows from further axis reflections that
preserve the case's tensor.

AdS2 charts are derived from the dS2 ones by swapping the ambient t and y
axes together with u and v.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .concircular import ConcircularTensor, NotOrthogonal, eigenfunctions
from .elliptic import complete_elliptic_K, jacobi_elliptic
from .pseudo_space import ADS2, DS2, E, SpaceError

E2 = E(2)
E2_1 = E(2, 1)
S2 = math.sqrt(2.0)
INF = math.inf

SINGULAR = "SingularSet"
NOT_IN_DOMAIN = "NotInDomain"


class CatalogError(ValueError):
    pass


class ChartRangeError(CatalogError):
    pass


@dataclass(frozen=True)
class Ranges:
    """Open box for (u, v) plus an optional ordering: 'v<u', 'u<v' or '|v|<u'."""

    u: tuple
    v: tuple
    order: str = None

    def contains(self, u, v, tol=0.0):
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        ok = (u > self.u[0] - tol) & (u < self.u[1] + tol) & (v > self.v[0] - tol) & (v < self.v[1] + tol)
        if self.order == "v<u":
            ok &= v < u + tol
        elif self.order == "u<v":
            ok &= u < v + tol
        elif self.order == "|v|<u":
            ok &= np.abs(v) < u + tol
        return ok

    def to_json(self):
        def f(x):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")
        return {"u": [f(x) for x in self.u], "v": [f(x) for x in self.v], "order": self.order}


@dataclass(frozen=True)
class WebChart:
    space: object
    case_id: str
    region: str
    name: str
    base: object = field(repr=False)         # (u, v, params) -> ambient array (..., dim)
    factors: object = field(repr=False)      # (u, v, params) -> (g_uu, g_vv)
    ranges: Ranges = None
    view: tuple = None                       # finite (ulo, uhi, vlo, vhi) used for sampling and plots
    signs: tuple = None                      # reflection applied to the base formula
    params: dict = field(default_factory=dict)
    ct: ConcircularTensor = field(default=None, repr=False)
    inverse: object = field(default=None, repr=False)  # (eigenvalues, point, params) -> (u, v)
    projection: tuple = (1, 0)
    note: str = ""

    @property
    def key(self):
        return f"{self.case_id}/{self.region}"

    def describe(self):
        return {
            "case": self.case_id, "region": self.region, "name": self.name,
            "space": self.space.name, "params": dict(self.params),
            "ranges": self.ranges.to_json(), "signs": list(self.signs),
            "ct": self.ct.to_json(),
        }


# -- helpers ---------------------------------------------------------------

def _pt(*cols):
    return np.stack(np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in cols]), axis=-1)


def _from_light(tmx, tpx, *rest):
    """(t - x, t + x, y...) -> (t, x, y...)."""
    return _pt(0.5 * (tpx + tmx), 0.5 * (tpx - tmx), *rest)


def _flip(f):
    """(h, -h) factors of a metric h (du^2 - dv^2)."""
    def factors(u, v, p):
        h = f(u, v, p)
        return h, -h
    return factors


def _flop(f):
    """(-h, h) factors of a metric h (-du^2 + dv^2)."""
    def factors(u, v, p):
        h = f(u, v, p)
        return -h, h
    return factors


def _J(u, a):
    return jacobi_elliptic(u, a)


def _ct(space, A=None, w=None, m=0.0):
    d = space.dim
    A = np.zeros((d, d)) if A is None else np.asarray(A, dtype=float)
    if space.is_sphere:
        return ConcircularTensor(space, A)
    return ConcircularTensor(space, A, w, m)


def _outer(k):
    k = np.asarray(k, dtype=float)
    return np.outer(k, k)


def _need(params, name, lo=None, hi=None):
    x = float(params[name])
    if lo is not None and not x > lo:
        raise CatalogError(f"parameter {name}={x} must exceed {lo}")
    if hi is not None and not x < hi:
        raise CatalogError(f"parameter {name}={x} must be below {hi}")
    return x


_K_E2_1 = np.array([1.0, 1.0]) / S2       # d_eta
_Z_E2_1 = np.array([1.0, -1.0]) / S2      # d_zeta
_Z3 = np.array([1.0, -1.0, 0.0]) / S2
_H3 = np.array([1.0, 1.0, 0.0]) / S2
_EY = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class _Region:
    label: str
    base: object
    factors: object
    ranges: object          # Ranges or callable(params) -> Ranges
    view: object            # tuple or callable(params) -> tuple
    signs: tuple = None
    inverse: object = None
    note: str = ""


@dataclass(frozen=True)
class _Case:
    case_id: str
    space: object
    name: str
    defaults: dict
    validate: object        # params -> params (normalized) or raises
    ct: object              # params -> ConcircularTensor
    regions: tuple
    classify: object = None  # (point, params) -> label or None
    projection: tuple = (1, 0)


def _noparams(p):
    return {}


def _a_pos(p):
    return {"a": _need(p, "a", 0.0)}


def _a_unit(p):
    a = _need(p, "a", 0.0, 1.0)
    b = math.sqrt(1.0 - a * a)
    if "b" in p and abs(float(p["b"]) - b) > 1e-12:
        raise CatalogError("parameters must satisfy a^2 + b^2 = 1")
    return {"a": a, "b": b}


def _solve_increasing(f, y, lo, hi):
    """x in (lo, hi) with f(x) = y for an increasing f."""
    eps = 1e-12 * max(1.0, hi - lo)
    a, b = lo + eps, hi - eps
    fa, fb = f(a) - y, f(b) - y
    if fa >= 0:
        return a
    if fb <= 0:
        return b
    return brentq(lambda x: f(x) - y, a, b, xtol=1e-15, maxiter=200)


def _always(label="1"):
    return lambda p, q: label


# -- E2 --------------------------------------------------------------------

def _e2_cases():
    R = Ranges
    tau = 2 * math.pi

    def inv_elliptic(lams, p, q):
        # eigenfunctions of e.e + a^-2 r.r are cos^2 v and cosh^2 u
        lo, hi = lams
        u = np.arccosh(np.sqrt(max(hi, 1.0)))
        v = np.arccos(np.clip(np.sqrt(max(lo, 0.0)), -1, 1))
        if p[0] < 0:
            v = math.pi - v
        if p[1] < 0:
            v = tau - v
        return u, v

    def inv_parabolic(lams, p, q):
        # L = 2 d.r has eigenfunctions -v^2 and u^2
        lo, hi = lams
        u = math.sqrt(max(hi, 0.0))
        v = math.copysign(math.sqrt(max(-lo, 0.0)), p[1])
        return u, v

    return [
        _Case("E2.case1", E2, "cartesian", {}, _noparams,
              lambda p: _ct(E2, np.diag([1.0, 0.0])),
              (_Region("1", lambda u, v, p: _pt(u, v), lambda u, v, p: (np.ones_like(u), np.ones_like(v)),
                       R((-INF, INF), (-INF, INF)), (-2, 2, -2, 2), (1, 1)),),
              _always(), projection=(0, 1)),
        _Case("E2.case2", E2, "polar", {}, _noparams,
              lambda p: _ct(E2, m=1.0),
              (_Region("1", lambda u, v, p: _pt(u * np.cos(v), u * np.sin(v)),
                       lambda u, v, p: (np.ones_like(u), u * u),
                       R((0, INF), (0, tau)), (0.1, 2, 0.02, tau - 0.02), (1, 1)),),
              _always(), projection=(0, 1)),
        _Case("E2.case3", E2, "elliptic", {"a": 1.0}, _a_pos,
              lambda p: _ct(E2, np.diag([0.0, 1.0]), m=p["a"] ** -2),
              (_Region("1", lambda u, v, p: _pt(p["a"] * np.cos(v) * np.cosh(u), p["a"] * np.sin(v) * np.sinh(u)),
                       lambda u, v, p: (p["a"] ** 2 * (np.sinh(u) ** 2 + np.sin(v) ** 2),) * 2,
                       R((0, INF), (0, tau)), (0.1, 1.6, 0.02, tau - 0.02), (1, 1), inv_elliptic),),
              _always(), projection=(0, 1)),
        _Case("E2.case4", E2, "parabolic", {}, _noparams,
              lambda p: _ct(E2, w=[1.0, 0.0]),
              (_Region("1", lambda u, v, p: _pt(0.5 * (u * u - v * v), u * v),
                       lambda u, v, p: (u * u + v * v,) * 2,
                       R((0, INF), (-INF, INF)), (0.1, 1.8, -1.8, 1.8), (1, 1), inv_parabolic),),
              _always(), projection=(0, 1)),
    ]


# -- E2_1 ------------------------------------------------------------------

def _e21_cases():
    R = Ranges
    ch, sh, cs, sn, ex = np.cosh, np.sinh, np.cos, np.sin, np.exp

    def zeta_eta(q):
        return (q[0] - q[1]) / S2, (q[0] + q[1]) / S2

    def cls2(p, q):
        t, x = q
        if t > abs(x):
            return "N"
        if t < -abs(x):
            return "S"
        if x > abs(t):
            return "E"
        if x < -abs(t):
            return "W"
        return None

    def cls4(p, q):
        a = p["a"]
        t, x = q
        m, s = t - x, t + x
        if m > a and s > a:
            return "N"
        if m < -a and s < -a:
            return "S"
        if m < -a and s > a:
            return "E"
        if m > a and s < -a:
            return "W"
        if abs(m) < a and abs(s) < a:
            return "C"
        return None

    def cls5(p, q):
        z, _ = zeta_eta(q)
        if z > p["a"]:
            return "1"
        if z < -p["a"]:
            return "2"
        return None

    def cls6(p, q):
        z, _ = zeta_eta(q)
        return "1" if z > 0 else ("2" if z < 0 else None)

    def cls7(p, q):
        z, h = zeta_eta(q)
        if h > 1 and z > 0:
            return "N"
        if h < -1 and z < 0:
            return "S"
        if h > 1 and z < 0:
            return "E"
        if h < -1 and z > 0:
            return "W"
        return None

    def cls8(p, q):
        t, x = q
        return "N" if t > abs(x) else ("S" if t < -abs(x) else None)

    def cls9(p, q):
        t, x = q
        return "E" if x > abs(t) else ("W" if x < -abs(t) else None)

    def cls10(p, q):
        z, _ = zeta_eta(q)
        return "1" if z > 0 else None

    # inverse maps from the sorted eigenfunctions (lo, hi) of the case tensor
    def inv3(lams, q, p):
        a2 = p["a"] ** 2
        lo, hi = lams
        return np.arccosh(np.sqrt(max(hi / a2, 1.0))), np.arcsinh(np.sqrt(max(-lo / a2, 0.0)))

    def inv4N(lams, q, p):
        a2 = p["a"] ** 2
        lo, hi = lams
        return np.arcsinh(np.sqrt(max(-lo / a2, 0.0))), np.arcsinh(np.sqrt(max(-hi / a2, 0.0)))

    def inv4E(lams, q, p):
        a2 = p["a"] ** 2
        lo, hi = lams
        return np.arccosh(np.sqrt(max(lo / a2, 1.0))), np.arccosh(np.sqrt(max(hi / a2, 1.0)))

    def inv4C(lams, q, p):
        a2 = p["a"] ** 2
        lo, hi = lams
        return np.arcsin(np.sqrt(np.clip(hi / a2, 0, 1))), np.arcsin(np.sqrt(np.clip(lo / a2, 0, 1)))

    def inv5(lams, q, p):
        a2 = p["a"] ** 2
        lo, hi = lams
        return 0.5 * np.arcsinh(-lo / a2), 0.5 * np.arcsinh(hi / a2)

    def inv6(lams, q, p):
        lo, hi = lams
        return 0.5 * math.log(-lo), 0.5 * math.log(hi)

    def inv7N(lams, q, p):
        lo, hi = lams
        return 0.5 * math.log(-hi), 0.5 * math.log(-lo)

    def inv7E(lams, q, p):
        lo, hi = lams
        return 0.5 * math.log(hi), 0.5 * math.log(lo)

    def inv8(lams, q, p):
        lo, hi = lams
        return math.sqrt(max(-lo, 0.0)), math.sqrt(max(-hi, 0.0))

    def inv9(lams, q, p):
        lo, hi = lams
        return math.sqrt(max(hi, 0.0)), math.sqrt(max(lo, 0.0))

    def inv8S(lams, q, p):
        # reflected region: the eigenfunctions change sign
        return inv9(lams, q, p)

    def inv9W(lams, q, p):
        return inv8(lams, q, p)

    def inv10(lams, q, p):
        lo, hi = lams
        return hi, lo

    def c5(u, v, p):
        a = p["a"]
        return _from_light(S2 * a * ch(u + v), S2 * a * sh(u - v))

    def c6(u, v, p):
        return _from_light(S2 * ex(u + v), S2 * sh(u - v))

    def c7(sg):
        return lambda u, v, p: _from_light(sg * S2 * ex(u + v), S2 * ch(u - v))

    def c10(u, v, p):
        return _from_light(S2 / 8 * (u - v) ** 2, -S2 / 2 * (u + v))

    one = lambda u, v, p: (-np.ones_like(u * v), np.ones_like(u * v))
    return [
        _Case("E21.case1", E2_1, "cartesian", {}, _noparams,
              lambda p: _ct(E2_1, np.diag([1.0, 0.0])),
              (_Region("1", lambda u, v, p: _pt(u, v), one, R((-INF, INF), (-INF, INF)), (-2, 2, -2, 2), (1, 1)),),
              _always()),
        _Case("E21.case2", E2_1, "Rindler", {}, _noparams,
              lambda p: _ct(E2_1, m=1.0),
              (_Region("E", lambda u, v, p: _pt(u * sh(v), u * ch(v)), lambda u, v, p: (np.ones_like(v), -u * u),
                       R((0, INF), (-INF, INF)), (0.1, 2, -1.5, 1.5), (1, 1)),
               _Region("W", lambda u, v, p: _pt(u * sh(v), u * ch(v)), lambda u, v, p: (np.ones_like(v), -u * u),
                       R((0, INF), (-INF, INF)), (0.1, 2, -1.5, 1.5), (1, -1)),
               _Region("N", lambda u, v, p: _pt(u * ch(v), u * sh(v)), lambda u, v, p: (-np.ones_like(v), u * u),
                       R((0, INF), (-INF, INF)), (0.1, 2, -1.5, 1.5), (1, 1)),
               _Region("S", lambda u, v, p: _pt(u * ch(v), u * sh(v)), lambda u, v, p: (-np.ones_like(v), u * u),
                       R((0, INF), (-INF, INF)), (0.1, 2, -1.5, 1.5), (-1, 1))),
              cls2),
        _Case("E21.case3", E2_1, "real elliptic type I", {"a": 1.0}, _a_pos,
              lambda p: _ct(E2_1, np.diag([0.0, p["a"] ** 2]), m=1.0),
              (_Region("1", lambda u, v, p: _pt(p["a"] * ch(u) * sh(v), p["a"] * ch(v) * sh(u)),
                       _flip(lambda u, v, p: p["a"] ** 2 * (ch(u) ** 2 + sh(v) ** 2)),
                       R((0, INF), (0, INF)), (0.05, 1.5, 0.05, 1.5), (1, 1), inv3),),
              _always()),
        _Case("E21.case4", E2_1, "real elliptic type II", {"a": 1.0}, _a_pos,
              lambda p: _ct(E2_1, np.diag([-p["a"] ** 2, 0.0]), m=1.0),
              (_Region("N", lambda u, v, p: _pt(p["a"] * ch(u) * ch(v), p["a"] * sh(v) * sh(u)),
                       _flop(lambda u, v, p: p["a"] ** 2 * (ch(u) ** 2 - ch(v) ** 2)),
                       R((0, INF), (0, INF), "v<u"), (0.05, 1.5, 0.05, 1.5), (1, 1), inv4N),
               _Region("S", lambda u, v, p: _pt(p["a"] * ch(u) * ch(v), p["a"] * sh(v) * sh(u)),
                       _flop(lambda u, v, p: p["a"] ** 2 * (ch(u) ** 2 - ch(v) ** 2)),
                       R((0, INF), (0, INF), "v<u"), (0.05, 1.5, 0.05, 1.5), (-1, -1), inv4N),
               _Region("E", lambda u, v, p: _pt(p["a"] * sh(u) * sh(v), p["a"] * ch(v) * ch(u)),
                       _flop(lambda u, v, p: p["a"] ** 2 * (ch(v) ** 2 - ch(u) ** 2)),
                       R((0, INF), (0, INF), "u<v"), (0.05, 1.5, 0.05, 1.5), (1, 1), inv4E),
               _Region("W", lambda u, v, p: _pt(p["a"] * sh(u) * sh(v), p["a"] * ch(v) * ch(u)),
                       _flop(lambda u, v, p: p["a"] ** 2 * (ch(v) ** 2 - ch(u) ** 2)),
                       R((0, INF), (0, INF), "u<v"), (0.05, 1.5, 0.05, 1.5), (-1, -1), inv4E),
               _Region("C", lambda u, v, p: _pt(p["a"] * cs(u) * cs(v), p["a"] * sn(v) * sn(u)),
                       _flip(lambda u, v, p: p["a"] ** 2 * (cs(u) ** 2 - cs(v) ** 2)),
                       R((0, math.pi / 2), (0, math.pi / 2), "v<u"), (0.02, 1.55, 0.02, 1.55), (1, 1), inv4C)),
              cls4),
        _Case("E21.case5", E2_1, "complex elliptic", {"a": 1.0}, _a_pos,
              lambda p: _ct(E2_1, [[0.0, p["a"] ** 2], [p["a"] ** 2, 0.0]], m=1.0),
              (_Region("1", c5, _flop(lambda u, v, p: p["a"] ** 2 * (sh(2 * u) + sh(2 * v))),
                       R((0, INF), (-INF, INF), "|v|<u"), (0.05, 1.5, -1.5, 1.5), (1, 1), inv5),
               _Region("2", c5, _flop(lambda u, v, p: p["a"] ** 2 * (sh(2 * u) + sh(2 * v))),
                       R((0, INF), (-INF, INF), "|v|<u"), (0.05, 1.5, -1.5, 1.5), (-1, -1), inv5)),
              cls5),
        _Case("E21.case6", E2_1, "null elliptic type I", {}, _noparams,
              lambda p: _ct(E2_1, _outer(_K_E2_1), m=1.0),
              (_Region("1", c6, _flop(lambda u, v, p: ex(2 * u) + ex(2 * v)),
                       R((-INF, INF), (-INF, INF)), (-1.2, 1.2, -1.2, 1.2), (1, 1), inv6),
               _Region("2", c6, _flop(lambda u, v, p: ex(2 * u) + ex(2 * v)),
                       R((-INF, INF), (-INF, INF)), (-1.2, 1.2, -1.2, 1.2), (-1, -1), inv6)),
              cls6),
        _Case("E21.case7", E2_1, "null elliptic type II", {}, _noparams,
              lambda p: _ct(E2_1, -_outer(_K_E2_1), m=1.0),
              (_Region("N", c7(1.0), _flip(lambda u, v, p: ex(2 * v) - ex(2 * u)),
                       R((-INF, INF), (-INF, INF), "u<v"), (-1.2, 1.2, -1.2, 1.2), (1, 1), inv7N),
               _Region("S", c7(1.0), _flip(lambda u, v, p: ex(2 * v) - ex(2 * u)),
                       R((-INF, INF), (-INF, INF), "u<v"), (-1.2, 1.2, -1.2, 1.2), (-1, -1), inv7N),
               _Region("E", c7(-1.0), _flip(lambda u, v, p: ex(2 * u) - ex(2 * v)),
                       R((-INF, INF), (-INF, INF), "v<u"), (-1.2, 1.2, -1.2, 1.2), (1, 1), inv7E),
               _Region("W", c7(-1.0), _flip(lambda u, v, p: ex(2 * u) - ex(2 * v)),
                       R((-INF, INF), (-INF, INF), "v<u"), (-1.2, 1.2, -1.2, 1.2), (-1, -1), inv7E)),
              cls7),
        _Case("E21.case8", E2_1, "timelike parabolic", {}, _noparams,
              lambda p: _ct(E2_1, w=[1.0, 0.0]),
              (_Region("N", lambda u, v, p: _pt(0.5 * (u * u + v * v), u * v),
                       lambda u, v, p: (-(u * u - v * v), u * u - v * v),
                       R((0, INF), (0, INF), "v<u"), (0.05, 1.8, 0.05, 1.8), (1, 1), inv8),
               _Region("S", lambda u, v, p: _pt(0.5 * (u * u + v * v), u * v),
                       lambda u, v, p: (-(u * u - v * v), u * u - v * v),
                       R((0, INF), (0, INF), "v<u"), (0.05, 1.8, 0.05, 1.8), (-1, 1), inv8S)),
              cls8),
        _Case("E21.case9", E2_1, "spacelike parabolic", {}, _noparams,
              lambda p: _ct(E2_1, w=[0.0, 1.0]),
              (_Region("E", lambda u, v, p: _pt(u * v, 0.5 * (u * u + v * v)),
                       lambda u, v, p: (u * u - v * v, -(u * u - v * v)),
                       R((0, INF), (0, INF), "v<u"), (0.05, 1.8, 0.05, 1.8), (1, 1), inv9),
               _Region("W", lambda u, v, p: _pt(u * v, 0.5 * (u * u + v * v)),
                       lambda u, v, p: (u * u - v * v, -(u * u - v * v)),
                       R((0, INF), (0, INF), "v<u"), (0.05, 1.8, 0.05, 1.8), (1, -1), inv9W)),
              cls9),
        _Case("E21.case10", E2_1, "null parabolic", {}, _noparams,
              lambda p: _ct(E2_1, _outer(_K_E2_1), w=_Z_E2_1),
              (_Region("1", c10, lambda u, v, p: (0.25 * (u - v), -0.25 * (u - v)),
                       R((0, INF), (0, INF), "v<u"), (0.05, 2.5, 0.05, 2.5), (1, 1), inv10),),
              cls10),
    ]


# -- dS2 -------------------------------------------------------------------

def _ds2_cases():
    R = Ranges
    ch, sh, cs, ex = np.cosh, np.sinh, np.cos, np.exp

    def Ka(p):
        return complete_elliptic_K(p["a"])

    def Kb(p):
        return complete_elliptic_K(p["b"])

    def d1(u, v, p):
        U, V = _J(u, p["a"]), _J(v, p["a"])
        return _pt(U.sc * V.dn, U.nc * V.cn, U.dc * V.sn)

    def f1(u, v, p):
        h = _J(u, p["a"]).dc ** 2 - p["a"] ** 2 * _J(v, p["a"]).sn ** 2
        return -h, h

    def d2a(u, v, p):
        a, b = p["a"], p["b"]
        U, V = _J(u, a), _J(v, a)
        return _pt(b / a * U.nc * V.nc, b * U.sc * V.sc, U.dc * V.dc / a)

    def f2a(u, v, p):
        h = _J(u, p["a"]).dc ** 2 - _J(v, p["a"]).dc ** 2
        return -h, h

    def d2b(u, v, p):
        a, b = p["a"], p["b"]
        U, V = _J(u, b), _J(v, b)
        return _pt(a * b * U.sd * V.sd, b * U.cd * V.cd, a * U.nd * V.nd)

    def f2b(u, v, p):
        h = p["a"] ** 2 * (_J(u, p["b"]).nd ** 2 - _J(v, p["b"]).nd ** 2)
        return h, -h

    def d5(u, v, p):
        a, b = p["a"], p["b"]
        U2, V2 = _J(2 * u, a), _J(2 * v, a)
        S = 2 * U2.dn * V2.dn / (a * b * (1 + U2.cn) * (1 + V2.cn))   # t^2 + x^2
        D = 2 * (U2.cn + V2.cn) / ((1 + U2.cn) * (1 + V2.cn))        # -t^2 + x^2
        U, V = _J(u, a), _J(v, a)
        y = U.sn * U.dc * V.sn * V.dc
        return _pt(np.sqrt(np.maximum(0.5 * (S - D), 0.0)), np.sqrt(np.maximum(0.5 * (S + D), 0.0)), y)

    def f5(u, v, p):
        U, V = _J(u, p["a"]), _J(v, p["a"])
        h = U.sn ** 2 * U.dc ** 2 - V.sn ** 2 * V.dc ** 2
        return -h, h

    def sec(z):
        return 1 / np.cos(z)

    def d6(u, v, p):
        return _from_light(-ch(u) * sh(v) * (1 - np.tanh(u) ** 2 / np.tanh(v) ** 2),
                           1 / ch(u) / sh(v), np.tanh(u) / np.tanh(v))

    def d7a(u, v, p):
        return _from_light(-cs(u) * cs(v) * (1 - np.tan(u) ** 2 * np.tan(v) ** 2), sec(u) * sec(v),
                           np.tan(u) * np.tan(v))

    def d7b(u, v, p):
        return _from_light(-sh(u) * sh(v) * (1 - 1 / np.tanh(u) ** 2 / np.tanh(v) ** 2), 1 / sh(u) / sh(v),
                           1 / np.tanh(u) / np.tanh(v))

    def d7c(u, v, p):
        return _from_light(-ch(u) * ch(v) * (1 - np.tanh(u) ** 2 * np.tanh(v) ** 2), 1 / ch(u) / ch(v),
                           np.tanh(u) * np.tanh(v))

    def d8(u, v, p):
        return _from_light(-ex(u), ex(-u) - v * v * ex(u), v * ex(u))

    def d9(u, v, p):
        return _from_light((u * u - v * v) ** 2 / (4 * u * v), 1 / (u * v), (u * u + v * v) / (2 * u * v))

    def ell(name, mod, scale=1.0):
        return lambda x: scale * _J(x, mod).get(name) ** 2

    def inv1(lams, q, p):
        a, k = p["a"], Ka(p)
        lo, hi = lams
        return (_solve_increasing(ell("dc", a), hi, 0.0, k),
                _solve_increasing(ell("sn", a, a * a), lo, 0.0, k))

    def inv2a(lams, q, p):
        a, k = p["a"], Ka(p)
        lo, hi = lams
        return _solve_increasing(ell("dc", a), hi, 0.0, k), _solve_increasing(ell("dc", a), lo, 0.0, k)

    def inv2b(lams, q, p):
        a, b, k = p["a"], p["b"], Kb(p)
        f = ell("nd", b, a * a)
        lo, hi = lams
        return _solve_increasing(f, hi, 0.0, k), _solve_increasing(f, lo, 0.0, k)

    def inv5(lams, q, p):
        a, k = p["a"], Ka(p)

        def f(x):
            J = _J(x, a)
            return (J.sn * J.dc) ** 2
        lo, hi = lams
        return _solve_increasing(f, hi, 0.0, k), _solve_increasing(f, lo, 0.0, k)

    def inv6(lams, q, p):
        lo, hi = lams
        return np.arccosh(np.sqrt(0.5 / hi)), np.arcsinh(np.sqrt(-0.5 / lo))

    def inv7a(lams, q, p):
        lo, hi = lams
        return np.arccos(np.sqrt(-0.5 / lo)), np.arccos(np.sqrt(-0.5 / hi))

    def inv7b(lams, q, p):
        lo, hi = lams
        return np.arcsinh(np.sqrt(0.5 / lo)), np.arcsinh(np.sqrt(0.5 / hi))

    def inv7c(lams, q, p):
        lo, hi = lams
        return np.arccosh(np.sqrt(-0.5 / lo)), np.arccosh(np.sqrt(-0.5 / hi))

    def inv9(lams, q, p):
        lo, hi = lams
        return hi ** -0.5, lo ** -0.5

    def cls2(p, q):
        t, x, y = q
        a, b = p["a"], p["b"]
        if a * abs(t) - abs(x) > b:
            return "1"
        if a * abs(t) + abs(x) < b:
            return "2"
        return None

    def cls4(p, q):
        t, x, y = q
        s = -t * t + x * x
        return "1" if s > 0 else ("2" if s < 0 else None)

    def cls7(p, q):
        t, x, y = q
        if abs(x) > 1 and t * x > 0:
            return "1"
        if abs(x) > 1 and t * x < 0:
            return "2" if abs(y) > 1 else ("3" if abs(y) < 1 else None)
        return None

    def a_unit_view(p, lo=0.05):
        k = Ka(p)
        return (lo, k - lo, lo, k - lo)

    def mx(m):
        return lambda u, v, p: (-np.ones_like(u * v), m(u, v))

    tau = 2 * math.pi
    return [
        _Case("DS2.case1", DS2, "real elliptic type I", {"a": 0.6}, _a_unit,
              lambda p: _ct(DS2, np.diag([-1.0, p["a"] ** 2, 0.0])),
              (_Region("1", d1, f1, lambda p: R((0, Ka(p)), (0, Ka(p))), a_unit_view, (1, 1, 1), inv1),),
              _always()),
        _Case("DS2.case2", DS2, "real elliptic type II", {"a": 0.6}, _a_unit,
              lambda p: _ct(DS2, np.diag([-p["a"] ** 2, 1.0, 0.0])),
              (_Region("1", d2a, f2a, lambda p: R((0, Ka(p)), (0, Ka(p)), "v<u"), a_unit_view, (1, 1, 1), inv2a),
               _Region("2", d2b, f2b, lambda p: R((0, Kb(p)), (0, Kb(p)), "v<u"),
                       lambda p: (0.05, Kb(p) - 0.05, 0.05, Kb(p) - 0.05), (1, 1, 1), inv2b,
                       note="modulus b = sqrt(1 - a^2) in this sub-chart")),
              cls2),
        _Case("DS2.case3", DS2, "spherical type I", {}, _noparams,
              lambda p: _ct(DS2, np.diag([1.0, 0.0, 0.0])),
              (_Region("1", lambda u, v, p: _pt(sh(u), ch(u) * cs(v), ch(u) * np.sin(v)),
                       mx(lambda u, v: ch(u) ** 2), R((-INF, INF), (-math.pi, math.pi)),
                       (-1.5, 1.5, -math.pi + 0.02, math.pi - 0.02), (1, 1, 1),
                       note="v is an angle; the window (-pi, pi) is used"),),
              _always(), projection=(1, 2)),
        _Case("DS2.case4", DS2, "spherical type II", {}, _noparams,
              lambda p: _ct(DS2, np.diag([-1.0, 1.0, 0.0])),
              (_Region("1", lambda u, v, p: _pt(np.sin(u) * sh(v), np.sin(u) * ch(v), cs(u)),
                       lambda u, v, p: (np.ones_like(u * v), -np.sin(u) ** 2),
                       R((0, math.pi), (-INF, INF)), (0.05, math.pi - 0.05, -1.5, 1.5), (1, 1, 1)),
               _Region("2", lambda u, v, p: _pt(sh(u) * ch(v), sh(u) * sh(v), ch(u)),
                       mx(lambda u, v: sh(u) ** 2), R((0, INF), (-INF, INF)), (0.05, 1.5, -1.5, 1.5), (1, 1, 1))),
              cls4),
        _Case("DS2.case5", DS2, "complex elliptic", {"a": 0.6}, _a_unit,
              lambda p: _ct(DS2, [[p["b"] ** 2 - p["a"] ** 2, 2 * p["a"] * p["b"], 0.0],
                                  [2 * p["a"] * p["b"], p["a"] ** 2 - p["b"] ** 2, 0.0],
                                  [0.0, 0.0, 0.0]]),
              (_Region("1", d5, f5, lambda p: R((0, Ka(p)), (0, Ka(p)), "v<u"), a_unit_view, (1, 1, 1), inv5,
                       note="t, x recovered as positive square roots; other octants by reflection"),),
              _always()),
        _Case("DS2.case6", DS2, "null elliptic type I", {}, _noparams,
              lambda p: _ct(DS2, _outer(_Z3) + 0.5 * _outer(_EY)),
              (_Region("1", d6, _flip(lambda u, v, p: 1 / ch(u) ** 2 + 1 / sh(v) ** 2),
                       R((0, INF), (0, INF)), (0.1, 1.8, 0.1, 1.8), (1, 1, 1), inv6),),
              _always()),
        _Case("DS2.case7", DS2, "null elliptic type II", {}, _noparams,
              lambda p: _ct(DS2, _outer(_Z3) - 0.5 * _outer(_EY)),
              (_Region("1", d7a, lambda u, v, p: (-(sec(u) ** 2 - sec(v) ** 2), sec(u) ** 2 - sec(v) ** 2),
                       R((0, math.pi / 2), (0, math.pi / 2), "v<u"), (0.03, 1.45, 0.03, 1.45), (1, 1, 1), inv7a),
               _Region("2", d7b, _flip(lambda u, v, p: 1 / sh(v) ** 2 - 1 / sh(u) ** 2),
                       R((0, INF), (0, INF), "v<u"), (0.1, 1.8, 0.1, 1.8), (1, 1, 1), inv7b),
               _Region("3", d7c, _flip(lambda u, v, p: 1 / ch(u) ** 2 - 1 / ch(v) ** 2),
                       R((0, INF), (0, INF), "u<v"), (0.1, 1.8, 0.1, 1.8), (1, 1, 1), inv7c)),
              cls7),
        _Case("DS2.case8", DS2, "null spherical", {}, _noparams,
              lambda p: _ct(DS2, _outer(_H3)),
              (_Region("1", d8, mx(lambda u, v: ex(2 * u)), R((-INF, INF), (-INF, INF)),
                       (-1.2, 1.2, -1.2, 1.2), (1, 1, 1)),),
              _always()),
        _Case("DS2.case9", DS2, "null elliptic type III", {}, _noparams,
              lambda p: _ct(DS2, [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, -1.0, 0.0]]),
              (_Region("1", d9, lambda u, v, p: (-(u ** -2 - v ** -2), u ** -2 - v ** -2),
                       R((0, INF), (0, INF), "u<v"), (0.2, 3.0, 0.2, 3.0), (1, 1, 1), inv9),),
              _always()),
    ]


_CASES = None


def _cases():
    global _CASES
    if _CASES is None:
        _CASES = {c.case_id: c for c in _e2_cases() + _e21_cases() + _ds2_cases()}
    return _CASES


def _space_key(space):
    if space == E2:
        return "E2"
    if space == E2_1:
        return "E21"
    if space == DS2:
        return "DS2"
    if space == ADS2:
        return "ADS2"
    raise CatalogError(f"no catalog for space {space.name}")


def _resolve(v, p):
    return v(p) if callable(v) else v


# -- AdS2 by the signature swap -------------------------------------------

_SWAP = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])


def ads2_swap(chart):
    """AdS2 chart from a dS2 chart: swap ambient t <-> y and u <-> v.

    g_uu'(u, v) = -g_vv(v, u), g_vv'(u, v) = -g_uu(v, u); the ambient metric
    is diag(-1, -1, 1) and the image lies on <p,p> = -1.
    """
    if chart.space == ADS2:
        return _unswap(chart)
    if chart.space != DS2:
        raise CatalogError("ads2_swap needs a dS2 chart")
    base, factors = chart.base, chart.factors

    def nb(u, v, p):
        return base(v, u, p) @ _SWAP

    def nf(u, v, p):
        guu, gvv = factors(v, u, p)
        return -gvv, -guu

    rg = chart.ranges
    order = {"v<u": "u<v", "u<v": "v<u"}.get(rg.order, rg.order)
    vw = chart.view
    inv = None
    if chart.inverse is not None:
        inv0 = chart.inverse

        def inv(lams, q, p):
            # the swapped tensor's endomorphism is -P (L g) P, so eigenvalues change sign
            u, v = inv0(np.sort(-np.asarray(lams)), np.asarray(q) @ _SWAP, p)
            return v, u
    ct = ConcircularTensor(ADS2, _SWAP @ chart.ct.A @ _SWAP)
    proj = tuple(2 - i if i in (0, 2) else i for i in chart.projection)
    return WebChart(ADS2, "ADS2." + chart.case_id.split(".", 1)[1], chart.region, chart.name, nb, nf,
                    Ranges(rg.v, rg.u, order), (vw[2], vw[3], vw[0], vw[1]), tuple(chart.signs[::-1]),
                    dict(chart.params), ct, inv, proj, chart.note)


def _unswap(chart):
    base, factors = chart.base, chart.factors

    def nb(u, v, p):
        return base(v, u, p) @ _SWAP

    def nf(u, v, p):
        guu, gvv = factors(v, u, p)
        return -gvv, -guu

    rg = chart.ranges
    order = {"v<u": "u<v", "u<v": "v<u"}.get(rg.order, rg.order)
    vw = chart.view
    ct = ConcircularTensor(DS2, _SWAP @ chart.ct.A @ _SWAP)
    proj = tuple(2 - i if i in (0, 2) else i for i in chart.projection)
    return WebChart(DS2, "DS2." + chart.case_id.split(".", 1)[1], chart.region, chart.name, nb, nf,
                    Ranges(rg.v, rg.u, order), (vw[2], vw[3], vw[0], vw[1]), tuple(chart.signs[::-1]),
                    dict(chart.params), ct, None, proj, chart.note)


# -- public API ------------------------------------------------------------

def _make_charts(case, params):
    p = dict(case.defaults)
    p.update(params or {})
    p = case.validate(p) if p else case.validate({})
    ct = case.ct(p)
    out = []
    for r in case.regions:
        out.append(WebChart(case.space, case.case_id, r.label, case.name, r.base, r.factors,
                            _resolve(r.ranges, p), _resolve(r.view, p), tuple(r.signs), p, ct,
                            r.inverse, case.projection, r.note))
    return out


def catalog_list(space):
    """Case descriptors for E2 (4), E2_1 (10), dS2 (9) or AdS2 (9, swapped)."""
    key = _space_key(space)
    src = "DS2" if key == "ADS2" else key
    out = []
    for cid, c in _cases().items():
        if cid.split(".")[0] != src:
            continue
        d = {"case": cid if key != "ADS2" else "ADS2." + cid.split(".", 1)[1], "name": c.name,
             "space": space.name, "regions": [r.label for r in c.regions], "params": dict(c.defaults)}
        out.append(d)
    out.sort(key=lambda d: int(d["case"].split("case")[1]))
    return out


def get_case(case_id, params=None):
    """All region charts of a case, e.g. get_case('E21.case4', {'a': 2})."""
    cid = normalize_case_id(case_id)
    if cid.startswith("ADS2."):
        return [ads2_swap(c) for c in get_case("DS2." + cid.split(".", 1)[1], params)]
    if cid not in _cases():
        raise CatalogError(f"unknown case '{case_id}'")
    return _make_charts(_cases()[cid], params)


def get_chart(case_id, region=None, params=None):
    charts = get_case(case_id, params)
    if region is None:
        return charts[0]
    for c in charts:
        if c.region == str(region):
            return c
    raise CatalogError(f"case {case_id} has no region '{region}'")


def all_charts(params=None):
    out = []
    for sp in (E2, E2_1, DS2, ADS2):
        for d in catalog_list(sp):
            out.extend(get_case(d["case"], params))
    return out


def normalize_case_id(case_id):
    s = str(case_id).strip()
    low = s.lower()
    for pre, canon in (("e21", "E21"), ("e2_1", "E21"), ("e2", "E2"), ("ads2", "ADS2"), ("ds2", "DS2")):
        if low.startswith(pre + "."):
            rest = low[len(pre) + 1:]
            if rest.isdigit():
                rest = "case" + rest
            return f"{canon}.{rest}"
    return s


def _check_range(chart, u, v):
    if not np.all(chart.ranges.contains(u, v)):
        raise ChartRangeError(f"(u, v) outside the ranges of {chart.key}")


def web_transform(chart, u, v, check=True):
    """Ambient point(s) for chart coordinates (u, v)."""
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if check:
        _check_range(chart, u, v)
    with np.errstate(all="ignore"):
        p = chart.base(u, v, chart.params)
    return p * np.asarray(chart.signs, dtype=float)


def web_metric(chart, u, v, check=True):
    """Diagonal metric components (g_uu, g_vv) at (u, v)."""
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if check:
        _check_range(chart, u, v)
    guu, gvv = chart.factors(u, v, chart.params)
    shape = np.broadcast(u, v).shape
    return np.broadcast_to(guu, shape).astype(float), np.broadcast_to(gvv, shape).astype(float)


def sample_interior(chart, rng, m, margin=0.0):
    """m random (u, v) pairs inside the chart's view box, honouring the ordering."""
    ulo, uhi, vlo, vhi = chart.view
    out = []
    while len(out) < m:
        u = rng.uniform(ulo, uhi, 4 * m)
        v = rng.uniform(vlo, vhi, 4 * m)
        ok = chart.ranges.contains(u, v)
        if chart.ranges.order == "v<u":
            ok &= u - v > 0.05
        elif chart.ranges.order == "u<v":
            ok &= v - u > 0.05
        elif chart.ranges.order == "|v|<u":
            ok &= (u - np.abs(v) > 0.05) & (np.abs(v) > 0.05)
        out.extend(zip(u[ok], v[ok]))
    uv = np.array(out[:m])
    return uv[:, 0], uv[:, 1]


def jacobian_fd(chart, u, v, h=3e-4):
    """Fourth-order central differences of the transform: (..., dim, 2)."""
    f = lambda uu, vv: web_transform(chart, uu, vv, check=False)
    du = (-f(u + 2 * h, v) + 8 * f(u + h, v) - 8 * f(u - h, v) + f(u - 2 * h, v)) / (12 * h)
    dv = (-f(u, v + 2 * h) + 8 * f(u, v + h) - 8 * f(u, v - h) + f(u, v - 2 * h)) / (12 * h)
    return np.stack([du, dv], axis=-1)


def pullback_error(chart, u, v, h=3e-4):
    J = jacobian_fd(chart, u, v, h)
    g = chart.space.g
    P = np.einsum("...ia,ij,...jb->...ab", J, g, J)
    guu, gvv = web_metric(chart, u, v, check=False)
    M = np.zeros(P.shape)
    M[..., 0, 0], M[..., 1, 1] = guu, gvv
    scale = np.maximum(np.abs(guu), np.abs(gvv))
    return np.abs(P - M).max(axis=(-2, -1)) / scale


def ct_offdiagonal(chart, u, v, h=3e-4):
    """|L(du, dv)| relative to the diagonal, with L the chart's tensor lowered by g."""
    J = jacobian_fd(chart, u, v, h)
    X = web_transform(chart, u, v, check=False)
    F = chart.ct.field()
    Lx = F(np.atleast_2d(X).reshape(-1, chart.space.dim)).reshape(X.shape + (chart.space.dim,))
    g = chart.space.g
    M = np.einsum("...ia,ij,...jk,kl,...lb->...ab", J, g, Lx, g, J)
    # scale by the size of the terms that cancel, not by their difference
    scale = np.linalg.norm(J[..., 0], axis=-1) * np.linalg.norm(J[..., 1], axis=-1) \
        * np.linalg.norm(Lx, axis=(-2, -1))
    return np.abs(M[..., 0, 1]) / np.maximum(scale, 1e-300)


def quadric_error(chart, u, v):
    if not chart.space.is_sphere:
        return np.zeros(np.broadcast(u, v).shape)
    X = web_transform(chart, u, v, check=False)
    q = np.einsum("...i,i,...i->...", X, chart.space.signs, X)
    return np.abs(q * chart.space.kappa - 1.0)


def chart_eigenvalues(chart, point):
    es = eigenfunctions(chart.ct, point)
    if not es.simple:
        raise NotOrthogonal("eigenfunctions are not simple here")
    return np.sort(es.values)


def inverse_error(chart, u, v):
    """|recovered (u, v) - (u, v)| through the eigenfunctions, or None if no inverse is known."""
    if chart.inverse is None:
        return None
    errs = []
    for uu, vv in zip(np.atleast_1d(u), np.atleast_1d(v)):
        q = web_transform(chart, uu, vv, check=False)
        q0 = q * np.asarray(chart.signs, dtype=float)   # back to the base formula's quadrant
        lams = chart_eigenvalues(chart, q)
        ru, rv = chart.inverse(lams, q0, chart.params)
        errs.append(max(abs(ru - uu), abs(rv - vv)))
    return np.array(errs)


def verify_chart(chart, n=100, seed=0, h=3e-4):
    """Pullback, diagonality, quadric and region checks at n random interior points."""
    rng = np.random.default_rng(seed)
    u, v = sample_interior(chart, rng, n)
    with np.errstate(all="ignore"):
        pb = pullback_error(chart, u, v, h)
        od = ct_offdiagonal(chart, u, v, h)
        qe = quadric_error(chart, u, v)
    X = web_transform(chart, u, v, check=False)
    labels = [web_region(chart.space, x, chart.params, only=chart.case_id).get(chart.case_id) for x in X]
    region_ok = float(np.mean([lab == chart.region for lab in labels]))
    inv = inverse_error(chart, u, v)
    out = {
        "case": chart.case_id, "region": chart.region, "n": int(n),
        "pullback": float(pb.max()), "offdiag": float(od.max()), "quadric": float(qe.max()),
        "region_agreement": region_ok,
        "inverse": None if inv is None else float(inv.max()),
    }
    out["ok"] = bool(out["pullback"] < 1e-6 and out["offdiag"] < 1e-8 and out["quadric"] < 1e-10
                     and region_ok == 1.0 and (inv is None or out["inverse"] < 1e-8))
    return out


def web_region(space, point, params=None, only=None):
    """Region label of the point for every catalog case of the space.

    Labels are the region names of the charts, SingularSet where the case
    tensor has repeated eigenvalues, NotInDomain where they are complex.
    `only` restricts the result to one case id.
    """
    key = _space_key(space)
    q = np.asarray(point, dtype=float)
    if q.shape != (space.dim,):
        raise SpaceError(f"point must have {space.dim} components")
    if key == "ADS2":
        space.check_point(q)
        inner = web_region(DS2, q @ _SWAP, params, None if only is None else "DS2." + only.split(".", 1)[1])
        return {"ADS2." + k.split(".", 1)[1]: v for k, v in inner.items()}
    space.check_point(q)
    out = {}
    for cid, case in _cases().items():
        if cid.split(".")[0] != key or (only is not None and cid != only):
            continue
        p = dict(case.defaults)
        p.update({k: v for k, v in (params or {}).items() if k in case.defaults})
        p = case.validate(p) if p else {}
        ct = case.ct(p)
        try:
            es = eigenfunctions(ct, q)
        except NotOrthogonal as e:
            out[cid] = NOT_IN_DOMAIN if "complex" in str(e) else SINGULAR
            continue
        if not es.simple:
            out[cid] = SINGULAR
            continue
        lab = case.classify(p, q)
        out[cid] = lab if lab is not None else SINGULAR
    return out


# -- rendering -------------------------------------------------------------

def _curve_points(chart, fixed, value, n):
    ulo, uhi, vlo, vhi = chart.view
    rg = chart.ranges
    if fixed == "u":
        lo, hi = vlo, vhi
        if rg.order == "v<u":
            hi = min(hi, value)
        elif rg.order == "u<v":
            lo = max(lo, value)
        elif rg.order == "|v|<u":
            lo, hi = max(lo, -value), min(hi, value)
        s = np.linspace(lo, hi, n + 2)[1:-1]
        u, v = np.full_like(s, value), s
    else:
        lo, hi = ulo, uhi
        if rg.order == "v<u":
            lo = max(lo, value)
        elif rg.order == "u<v":
            hi = min(hi, value)
        elif rg.order == "|v|<u":
            lo = max(lo, abs(value))
        s = np.linspace(lo, hi, n + 2)[1:-1]
        u, v = s, np.full_like(s, value)
    if len(s) == 0 or lo >= hi:
        return np.zeros((0, chart.space.dim)), u, v
    X = web_transform(chart, u, v, check=False)
    return X, u, v


def sample_curves(chart, grid_density=8, n=120):
    """List of (family, value, points) for grid_density u- and v-curves."""
    ulo, uhi, vlo, vhi = chart.view
    out = []
    for fam, lo, hi in (("u", ulo, uhi), ("v", vlo, vhi)):
        vals = np.linspace(lo, hi, grid_density + 2)[1:-1]
        for c in vals:
            X, _, _ = _curve_points(chart, fam, c, n)
            out.append((fam, float(c), X))
    return out


def boundary_curves(chart, n=120):
    """Images of the ordering line u = v (closed singular set) where it applies."""
    rg = chart.ranges
    ulo, uhi, vlo, vhi = chart.view
    if rg.order not in ("v<u", "u<v"):
        return []
    s = np.linspace(max(ulo, vlo), min(uhi, vhi), n)
    with np.errstate(all="ignore"):
        X = web_transform(chart, s, s, check=False)
    return [X]


def emit_web_svg(charts, grid_density=8, out=None, radius=3.0, size=400):
    """SVG of coordinate curves; one <path> per curve, class u-curve / v-curve / singular."""
    if isinstance(charts, WebChart):
        charts = [charts]
    paths = []
    scale = size / (2.0 * radius)

    def path_d(X, proj):
        segs, cur = [], []
        for p in X:
            a, b = p[proj[0]], p[proj[1]]
            if np.isfinite(a) and np.isfinite(b) and abs(a) <= radius and abs(b) <= radius:
                cur.append(f"{(a + radius) * scale:.3f},{(radius - b) * scale:.3f}")
            elif cur:
                segs.append(cur)
                cur = []
        if cur:
            segs.append(cur)
        return " ".join("M" + " L".join(s) for s in segs if len(s) > 1)

    for ch in charts:
        paths.append(f'<g class="region" data-chart="{ch.key}">')
        for fam, c, X in sample_curves(ch, grid_density):
            paths.append(f'<path class="{fam}-curve" data-chart="{ch.key}" data-value="{c:.6g}" '
                         f'd="{path_d(X, ch.projection)}"/>')
        for X in boundary_curves(ch):
            paths.append(f'<path class="singular" data-chart="{ch.key}" d="{path_d(X, ch.projection)}"/>')
        paths.append("</g>")
    doc = "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" width="{size}" height="{size}">',
        "<style>.u-curve{stroke:#1f77b4;fill:none;stroke-width:1}"
        ".v-curve{stroke:#d62728;fill:none;stroke-width:1}"
        ".singular{stroke:#000;fill:none;stroke-width:2}</style>",
        *paths,
        "</svg>",
    ]) + "\n"
    if out is not None:
        if hasattr(out, "write"):
            out.write(doc)
        else:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(doc)
    return doc


def curves_csv(charts, grid_density=8, n=40):
    """CSV rows chart,family,u,v,ambient... for the sampled curves."""
    if isinstance(charts, WebChart):
        charts = [charts]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    dim = charts[0].space.dim
    w.writerow(["chart", "family", "u", "v"] + [f"p{i}" for i in range(dim)])
    for ch in charts:
        ulo, uhi, vlo, vhi = ch.view
        for fam, lo, hi in (("u", ulo, uhi), ("v", vlo, vhi)):
            for c in np.linspace(lo, hi, grid_density + 2)[1:-1]:
                X, u, v = _curve_points(ch, fam, c, n)
                for k in range(len(X)):
                    w.writerow([ch.key, fam, repr(float(u[k])), repr(float(v[k]))] + [repr(float(x)) for x in X[k]])
    return buf.getvalue()
