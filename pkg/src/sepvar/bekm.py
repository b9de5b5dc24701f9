"""Recursive orthogonal separation driven by concircular tensors.

A level solves the KBD equation, picks a concircular tensor L from the
solution family and looks at its eigenstructure at a handful of probe
points.  Simple eigenvalues everywhere: L is a Benenti tensor and the level
ends in leaves.  A multidimensional eigenspace D: the space splits as a
warped product B x_rho F with F an integral manifold of D, the potential is
restricted to F and the procedure recurses there.

Only two split shapes are handled: axis splits (L constant, D a constant
eigenspace, rho = 1) and central splits (L = r(.)r about a centre, F a
pseudo-sphere, rho the radial distance).
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import web_catalog as wc
from .canonical_forms import (CARTESIAN, CENTRAL, NON_NULL_AXIAL, ClassificationError,
                              classify_ct, metric_jordan_form)
from .concircular import (ConcircularTensor, KillingTensorField, NotOrthogonal,
                          benenti_sequence, eigenfunctions, metric_field, sample_sphere)
from .kbd_solver import KbdError, SingularityError, kbd_solve, sample_points
from .polyfield import PolyMat
from .potential_dsl import ComposedPotential
from .pseudo_space import PseudoSpace, SpaceError, vec_to_json

N_PROBES = 8
MIN_AGREE = 6
MAX_TREES = 64
LEAF = "Leaf"
LEVEL = "Level"
FAIL = "Fail"


class SplitError(ValueError):
    """Multidimensional eigenspace of a shape we do not split."""


class UnresolvedTree(ValueError):
    pass


@dataclass
class Options:
    exhaustive: bool = False
    seed: int = 0
    box: tuple = None
    n_random: int = 24
    max_trees: int = MAX_TREES


# -- tree types -----------------------------------------------------------

@dataclass
class Leaf:
    label: str
    eigenvalue: float
    direction: np.ndarray = field(repr=False)

    kind = LEAF

    def to_json(self):
        return {"kind": LEAF, "label": self.label, "eigenvalue": self.eigenvalue,
                "direction": vec_to_json(self.direction)}


@dataclass
class WarpedSplit:
    """B x_rho F.  axis: x = x0 + E y (rho = 1).  central: x = x0 + rho p, p on F."""

    kind: str
    space: PseudoSpace
    fiber: PseudoSpace
    x0: np.ndarray
    basis: np.ndarray
    eigenvalue: float = 0.0
    eps: float = 1.0

    @property
    def geodesic_dim(self):
        return self.space.dim - self.fiber.n

    @property
    def eta(self):
        return np.diag(self.basis.T @ self.space.g @ self.basis)

    def embed(self, Y):
        Y = np.atleast_2d(Y)
        if self.kind == "axis":
            return self.x0 + Y @ self.basis.T
        return self.x0 + Y

    def rho(self, X):
        X = np.atleast_2d(X)
        if self.kind == "axis":
            return np.ones(len(X))
        Y = X - self.x0
        return np.sqrt(np.abs(np.einsum("mi,i,mi->m", Y, self.space.signs, Y)))

    def to_fiber(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kind == "axis":
            return ((X - self.x0) @ self.space.g @ self.basis) * self.eta
        return (X - self.x0) / self.rho(X)[:, None]

    def metric_defect(self, X, rng=None):
        """max |g(dpsi a, dpsi b) - (g_B + rho^2 g_F)(a, b)| at the points."""
        rng = np.random.default_rng(0) if rng is None else rng
        g = self.space.g
        worst = 0.0
        for x in np.atleast_2d(X):
            if self.kind == "axis":
                P = self.basis @ np.diag(self.eta) @ self.basis.T @ g
                for _ in range(3):
                    a, b = rng.normal(size=(2, self.space.dim))
                    lhs = a @ g @ b
                    rhs = (a - P @ a) @ g @ (b - P @ b) + (P @ a) @ g @ (P @ b)
                    worst = max(worst, abs(lhs - rhs))
            else:
                rho = self.rho(x)[0]
                p = self.to_fiber(x)[0]
                T = _tangent(self.fiber, p)
                for _ in range(3):
                    (da, db), (va, vb) = rng.normal(size=2), rng.normal(size=(2, T.shape[1]))
                    ta, tb = T @ va, T @ vb
                    # dpsi(drho, v) = drho p + rho v
                    lhs = (da * p + rho * ta) @ g @ (db * p + rho * tb)
                    rhs = da * db * (p @ g @ p) + rho ** 2 * (ta @ g @ tb)
                    worst = max(worst, abs(lhs - rhs))
        return worst

    def to_json(self):
        return {"kind": self.kind, "space": self.space.to_json(), "fiber": self.fiber.to_json(),
                "geodesic_dim": self.geodesic_dim, "x0": vec_to_json(self.x0),
                "basis": self.basis.tolist(), "eigenvalue": self.eigenvalue, "eps": self.eps,
                "warp": "1" if self.kind == "axis" else "|<x-x0,x-x0>|^(1/2)"}


@dataclass
class WarpedNode:
    split: WarpedSplit
    child: "SeparationTree"

    def to_json(self):
        return {"kind": "WarpedNode", "split": self.split.to_json(), "spherical_child": self.child.to_json()}


@dataclass
class SeparationTree:
    kind: str
    space: PseudoSpace
    ct: ConcircularTensor = None
    key: tuple = None
    name: str = ""
    chart: object = None
    leaves: list = field(default_factory=list)
    warped: list = field(default_factory=list)
    reason: str = ""
    potential: object = field(default=None, repr=False)
    box: tuple = field(default=None, repr=False)
    probe: np.ndarray = field(default=None, repr=False)

    @property
    def resolved(self):
        return self.kind == LEVEL and all(w.child.resolved for w in self.warped)

    @property
    def leaf_count(self):
        if self.kind != LEVEL:
            return 0
        return len(self.leaves) + sum(w.child.leaf_count for w in self.warped)

    @property
    def depth(self):
        return 1 + max((w.child.depth for w in self.warped), default=0)

    def names(self):
        return [self.name] if self.kind == LEVEL else []

    def to_json(self):
        if self.kind == FAIL:
            return {"kind": FAIL, "space": self.space.name, "reason": self.reason}
        return {
            "kind": LEVEL, "space": self.space.name, "name": self.name,
            "class": None if self.key is None else self.key[0],
            "ct": None if self.ct is None else self.ct.to_json(),
            "chart": None if self.chart is None else self.chart.key,
            "leaves": [lf.to_json() for lf in self.leaves],
            "warped": [w.to_json() for w in self.warped],
            "leaf_count": self.leaf_count,
        }


def fail(space, reason):
    return SeparationTree(FAIL, space, reason=reason)


# -- canonical keys -------------------------------------------------------

def _clusters(blocks, scale):
    items = sorted(((complex(b.eigenvalue).real, complex(b.eigenvalue).imag), (b.size, b.sign)) for b in blocks)
    out = []
    for (re, im), sz in items:
        if out and abs(re - out[-1][0][0]) <= 1e-6 * scale and abs(im - out[-1][0][1]) <= 1e-6 * scale:
            out[-1][1].append(sz)
        else:
            out.append(((re, im), [sz]))
    return [(bool(abs(lam[1]) > 1e-6 * scale), tuple(sorted(s))) for lam, s in out]


def _negated(cl):
    # -M reverses the eigenvalue order and flips the sign of even-size blocks
    return tuple((c, tuple(sorted((k, s * (-1) ** (k - 1)) for k, s in blk))) for c, blk in reversed(cl))


def class_key(L):
    """Geometric class of L up to isometry and L -> aL + bG; None when L ~ G."""
    sp = L.space
    if sp.is_sphere:
        M = L.A @ sp.g
        scale = 1.0 + np.abs(M).max()
        if np.abs(M - np.trace(M) / sp.dim * np.eye(sp.dim)).max() < 1e-9 * scale:
            return None
        spec = metric_jordan_form(M, sp.ambient(), tol=1e-8 * scale)
        cl = _clusters(spec.blocks, scale)
        return ("Sphere", None, None, min(tuple(cl), _negated(cl)))
    cls = classify_ct(L)
    if cls.normalized_ct is None:
        return None
    if cls.blocks is None:
        return (cls.tag, cls.index, cls.sign, None)
    scale = 1.0 + max(abs(complex(b.eigenvalue)) for b in cls.blocks.blocks)
    cl = _clusters(cls.blocks.blocks, scale)
    if cls.tag == CARTESIAN:
        cl = sorted(cl)
    return (cls.tag, cls.index, cls.sign, tuple(cl))


_CATALOG_KEYS = {}


def catalog_match(space, L):
    """First catalog case on the same space whose CT has the class of L."""
    if space not in (wc.E2, wc.E2_1, wc.DS2, wc.ADS2):
        return None
    if space not in _CATALOG_KEYS:
        table = []
        for d in wc.catalog_list(space):
            chart = wc.get_case(d["case"])[0]
            try:
                table.append((class_key(chart.ct), d["case"], d["name"], chart))
            except (ClassificationError, SpaceError):
                continue
        _CATALOG_KEYS[space] = table
    try:
        key = class_key(L)
    except (ClassificationError, SpaceError):
        return None
    for k, cid, name, chart in _CATALOG_KEYS[space]:
        if k == key:
            return cid, name, chart
    return None


# -- branch candidates ----------------------------------------------------

def _null_rows(M, tol=1e-10):
    if M.size == 0:
        return np.eye(M.shape[1])
    _, s, vt = np.linalg.svd(M)
    rank = int((s > tol * max(1.0, s.max(initial=0.0))).sum())
    return vt[rank:].T


def _disc(M):
    ev = np.linalg.eigvals(M)
    n = len(ev)
    d = 1.0 + 0j
    for i in range(n):
        for j in range(i + 1, n):
            d *= (ev[i] - ev[j]) ** 2
    return d.real


def _pure_central_params(space, x0, m=1.0):
    # m (r - x0)(.)(r - x0)
    L = ConcircularTensor(space, m * np.outer(x0, x0), -m * x0, m)
    return L.params


def _candidates(sol, rng, n_random):
    sp = sol.space
    d = sp.dim
    P = sol.params
    B = P[:, 1:] if sol.includes_trivial else P
    if B.shape[1] == 0:
        return []
    G = ConcircularTensor(sp, sp.ginv).params
    out = [b for b in B.T]
    k = B.shape[1]
    out += [B @ rng.normal(size=k) for _ in range(n_random)]
    nA = d * (d + 1) // 2
    if not sp.is_sphere:
        mrow = B[-1:, :]
        Z0 = _null_rows(mrow)
        B0 = B @ Z0
        if B0.shape[1]:
            out += list(B0.T) + [B0 @ rng.normal(size=B0.shape[1]) for _ in range(n_random // 2)]
            W = B0[nA:nA + d]
            Z00 = _null_rows(W)
            B00 = B0 @ Z00
            if B00.shape[1]:
                out += list(B00.T) + [B00 @ rng.normal(size=B00.shape[1]) for _ in range(4)]
            # null w inside m = 0
            Q = W.T @ sp.g @ W
            lam, U = np.linalg.eigh(0.5 * (Q + Q.T))
            tol = 1e-10 * max(1.0, np.abs(lam).max())
            pos = [U[:, i] / np.sqrt(lam[i]) for i in range(len(lam)) if lam[i] > tol]
            neg = [U[:, i] / np.sqrt(-lam[i]) for i in range(len(lam)) if lam[i] < -tol]
            for a, b in itertools.product(pos, neg):
                for s in (1.0, -1.0):
                    v = a + s * b
                    for _ in range(2):
                        extra = Z00 @ rng.normal(size=Z00.shape[1]) * 0.5 if Z00.shape[1] else 0.0
                        out.append(B0 @ (v + extra))
        if np.abs(mrow).max() > 1e-12:
            S = np.column_stack([B, G])
            Qs, _ = np.linalg.qr(S)

            def resid(x0):
                p = _pure_central_params(sp, x0)
                return p - Qs @ (Qs.T @ p)

            starts = [np.zeros(d)] + [rng.normal(size=d) for _ in range(4)]
            for x0 in starts:
                r = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
                p = _pure_central_params(sp, r.x)
                if np.linalg.norm(resid(r.x)) < 1e-9 * np.linalg.norm(p):
                    out.append(Qs @ (Qs.T @ p))
            # eigenvalue coincidences of the centred A on the slice m = 1
            alpha_p = np.linalg.lstsq(mrow, np.ones(1), rcond=None)[0]

            def shifted(beta):
                p = B @ (alpha_p + Z0 @ beta)
                L = ConcircularTensor.from_params(sp, p)
                A = L.A - np.outer(L.w, L.w) / L.m
                return p, A @ sp.g

            def dres(beta):
                _, M = shifted(beta)
                return [_disc(M) / max(1e-300, 1.0 + np.abs(M).max()) ** (d * (d - 1))]

            if Z0.shape[1] and d >= 2:
                for _ in range(6):
                    r = least_squares(dres, rng.normal(size=Z0.shape[1]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
                    if abs(r.fun[0]) < 1e-13:
                        out.append(shifted(r.x)[0])
    elif k >= 2:
        def sres(beta, a0, N):
            L = ConcircularTensor.from_params(sp, B @ (a0 + N @ beta))
            M = L.A @ sp.g
            return [_disc(M) / (1.0 + np.abs(M).max()) ** (d * (d - 1))]

        for _ in range(6):
            a0 = rng.normal(size=k)
            a0 /= np.linalg.norm(a0)
            N = _null_rows(a0[None, :])
            r = least_squares(sres, rng.normal(size=N.shape[1]) * 0.5, args=(a0, N),
                              xtol=1e-15, ftol=1e-15, gtol=1e-15)
            if abs(r.fun[0]) < 1e-13:
                out.append(B @ (a0 + N @ r.x))
    return out


def branch_classes(sol, seed=0, n_random=24):
    """[(key, L)] for the geometrically distinct non-trivial CTs found in the family."""
    rng = np.random.default_rng([seed, 7])
    seen = {}
    for p in _candidates(sol, rng, n_random):
        L = ConcircularTensor.from_params(sol.space, p / np.abs(p).max())
        try:
            key = class_key(L)
        except (ClassificationError, SpaceError, np.linalg.LinAlgError, ZeroDivisionError):
            continue
        if key is not None and key[3] is not None and key not in seen:
            seen[key] = L
    return list(seen.items())


# -- splits ---------------------------------------------------------------

def _g_orthonormal(D, g):
    Gm = D.T @ g @ D
    lam, U = np.linalg.eigh(0.5 * (Gm + Gm.T))
    if np.any(np.abs(lam) < 1e-10 * max(1.0, np.abs(lam).max())):
        raise SplitError("eigenspace is degenerate (contains a null direction)")
    E = D @ U / np.sqrt(np.abs(lam))
    order = np.argsort(np.sign(lam), kind="stable")
    return E[:, order]


def _tangent(space, p):
    n = space.g @ p
    _, _, vt = np.linalg.svd(n[None, :])
    return vt[1:].T


def warped_split(L, D, probe_point):
    """Split along the eigenspace D (columns) of L seen at probe_point."""
    sp = L.space
    if sp.is_sphere:
        raise SplitError("sphere tensors of dimension 2 are always Benenti; no split")
    D = np.atleast_2d(np.asarray(D, dtype=float))
    x = np.asarray(probe_point, dtype=float)
    k = D.shape[1]
    g = sp.g
    n = sp.dim
    try:
        cls = classify_ct(L)
    except ClassificationError as exc:
        raise SplitError(str(exc)) from exc
    if cls.tag == CARTESIAN:
        M = L.A @ g
        E = _g_orthonormal(D, g)
        eta = np.diag(E.T @ g @ E)
        c = float(np.mean([E[:, i] @ g @ M @ E[:, i] * eta[i] for i in range(k)]))
        if np.abs(M @ E - c * E).max() > 1e-7 * (1.0 + np.abs(M).max()):
            raise SplitError("eigenspace is not a constant eigenspace of L")
        x0 = x - E @ (eta * (E.T @ g @ x))
        nu = int((eta < 0).sum())
        return WarpedSplit("axis", sp, PseudoSpace(k, nu), x0, E, c, 1.0)
    if cls.tag == CENTRAL and k == n - 1:
        Ln = cls.normalized_ct
        Mn = Ln.A @ g
        if np.abs(Mn - np.trace(Mn) / n * np.eye(n)).max() > 1e-7 * (1.0 + np.abs(Mn).max()):
            raise SplitError(f"central tensor with non-scalar A: class {cls.tag} has no supported split")
        x0 = np.asarray(cls.shift, dtype=float)
        y = x - x0
        if np.abs(y @ g @ D).max() > 1e-7 * (1.0 + np.abs(y).max()) * np.abs(D).max():
            raise SplitError("eigenspace is not orthogonal to the radial direction")
        q = y @ g @ y
        if abs(q) < 1e-10 * (1.0 + y @ y):
            raise SplitError("probe point lies on the null cone of the centre")
        eps = float(np.sign(q))
        fiber = PseudoSpace(n - 1, sp.nu, eps)
        return WarpedSplit("central", sp, fiber, x0, np.eye(n), 0.0, eps)
    raise SplitError(f"unsupported split geometry for class {cls.tag} (eigenspace dim {k})")


def restrict_potential(V, split, check=True, rng=None):
    """V composed with the fiber embedding (rho = 1 slice for central splits)."""
    if split.kind == "axis":
        Vf = ComposedPotential(V, split.basis, split.x0, split.fiber)
    else:
        Vf = ComposedPotential(V, np.eye(split.space.dim), split.x0, split.fiber)
    if check:
        rng = np.random.default_rng(0) if rng is None else rng
        if split.kind == "axis":
            Y = rng.uniform(-1, 1, size=(16, split.fiber.dim))
        else:
            Y = sample_sphere(split.fiber, rng, 16)
        with np.errstate(all="ignore"):
            ok = np.isfinite(Vf.value(Y))
        if ok.sum() < len(Y) // 2:
            raise SingularityError("fiber embedding runs into singularities of the potential")
    return Vf


# -- the recursion --------------------------------------------------------

def _probes(V, space, box, rng):
    if space.is_sphere:
        pts = []
        while len(pts) < N_PROBES:
            X = sample_sphere(space, rng, N_PROBES)
            with np.errstate(all="ignore"):
                ok = np.isfinite(V.value(X))
            pts.extend(X[ok])
        return np.array(pts[:N_PROBES])
    center, hw = box
    return sample_points(V, space, center, hw, N_PROBES, rng)


def _structure(L, X):
    out = []
    for x in X:
        try:
            out.append(eigenfunctions(L, x))
        except (NotOrthogonal, SpaceError, np.linalg.LinAlgError):
            out.append(None)
    return out


_E3_BENENTI = {(1, 2): "prolate spheroidal", (2, 1): "oblate spheroidal", (1, 1, 1): "ellipsoidal"}
_E3_AXIS = {"cartesian": "Cartesian", "polar": "cylindrical", "elliptic": "elliptic cylindrical",
            "parabolic": "parabolic cylindrical"}
_E3_CENTRAL = {"spherical": "spherical", "sphero-conical": "conical"}


def _mults(key):
    return tuple(sum(s for s, _ in c[1]) for c in key[3])


def _level_name(space, L, key, warped):
    sig = space.name
    if not warped:
        if space.is_sphere and space.dim == 3 and space.nu == 0:
            return "spherical" if len(key[3]) == 2 else "sphero-conical"
        if space == PseudoSpace(3, 0):
            if key[0] == CENTRAL:
                return _E3_BENENTI.get(_mults(key), "ellipsoidal")
            if key[0] == NON_NULL_AXIAL:
                m = _mults(key)
                return "rotationally symmetric parabolic" if max(m) >= 2 else "paraboloidal"
            if key[0] == CARTESIAN:
                return "Cartesian"
        return f"{key[0]} Benenti web on {sig}"
    w = warped[0]
    inner = w.child.name
    if space == PseudoSpace(3, 0):
        table = _E3_AXIS if w.split.kind == "axis" else _E3_CENTRAL
        if inner in table:
            return table[inner]
    return f"{w.split.kind} split of {sig} over {w.split.fiber.name} ({inner})"


def _one_dim(space, V, box):
    # a 1-dimensional factor separates trivially
    lf = Leaf("1", 0.0, np.ones(space.dim) / np.sqrt(space.dim))
    return SeparationTree(LEVEL, space, name="line" if not space.is_sphere else "circle",
                          leaves=[lf], potential=V, box=box)


def _near(space, p, r, rng):
    X = p + rng.uniform(-r, r, size=(4 * N_PROBES, space.dim))
    if not space.is_sphere:
        return X
    q = np.einsum("mi,i,mi->m", X, space.signs, X) * space.kappa
    X = X[q > 1e-3]
    return X / np.sqrt(q[q > 1e-3])[:, None]


def _probe_boxes(V, space, box, rng):
    """The level box first, then small boxes around points where L may be orthogonal.

    On indefinite spaces a web lives on regions, so a box straddling a region
    boundary is replaced by one inside a region.
    """
    yield box, _probes(V, space, box, rng)
    pool = _probes(V, space, box, rng) if space.is_sphere else \
        sample_points(V, space, box[0], box[1], 4 * N_PROBES, rng)
    r = 0.25 * (box[1] if box is not None else 1.0)
    for p in pool[:8]:
        X = _near(space, p, r, rng)
        with np.errstate(all="ignore"):
            X = X[np.isfinite(V.value(X))][:N_PROBES]
        if len(X) == N_PROBES:
            yield (None if space.is_sphere else (p, r)), X


def _trees_for(L, key, V, space, box, opts, depth, rng):
    best = None
    for sub, X in _probe_boxes(V, space, box, rng):
        st = _structure(L, X)
        pats = [tuple(s.multiplicities) for s in st if s is not None]
        if not pats:
            best = best or f"no real diagonalizable eigenstructure at probes for class {key[0]}"
            continue
        pat = max(set(pats), key=lambda p: (pats.count(p), p))
        if pats.count(pat) >= MIN_AGREE:
            break
        best = f"eigenstructure disagrees across probes ({pats.count(pat)}/{N_PROBES})"
    else:
        return [fail(space, best)]
    box = sub
    i0 = next(i for i, s in enumerate(st) if s is not None and tuple(s.multiplicities) == pat)
    x, es = X[i0], st[i0]
    leaves, splits = [], []
    for j, (lam, mult, E) in enumerate(zip(es.values, es.multiplicities, es.spaces)):
        if mult == 1:
            leaves.append(Leaf(f"{space.name}:{j}", float(lam), E[:, 0]))
        else:
            splits.append(E)
    base = dict(space=space, ct=L, key=key, potential=V, box=box, probe=x)
    if not splits:
        tree = SeparationTree(LEVEL, leaves=leaves, **base)
        m = catalog_match(space, L)
        if m is not None:
            tree.chart = m[2]
            tree.name = m[1]
        else:
            tree.name = _level_name(space, L, key, [])
        return [tree]
    options = []
    for D in splits:
        try:
            split = warped_split(L, D, x)
            Vf = restrict_potential(V, split, rng=np.random.default_rng([opts.seed, depth, 3]))
        except (SplitError, SingularityError) as exc:
            return [fail(space, f"eigenspace of dim {D.shape[1]}: {exc}")]
        if split.fiber.n == 1:
            fb = None if split.fiber.is_sphere else (split.to_fiber(box[0])[0], box[1])
            options.append([(split, _one_dim(split.fiber, Vf, fb))])
            continue
        fbox = None
        if not split.fiber.is_sphere:
            fbox = (split.to_fiber(box[0])[0], box[1])
        kids = _resolve(Vf, split.fiber, fbox, opts, depth + 1)
        good = [t for t in kids if t.resolved]
        if not good:
            return [fail(space, f"fiber {split.fiber.name}: " + "; ".join(t.reason for t in kids if t.kind == FAIL))]
        options.append([(split, t) for t in good])
    out = []
    for combo in itertools.product(*options):
        warped = [WarpedNode(s, t) for s, t in combo]
        tree = SeparationTree(LEVEL, leaves=list(leaves), warped=warped, **base)
        tree.name = _level_name(space, L, key, warped)
        out.append(tree)
        if len(out) >= opts.max_trees:
            break
    return out


def _default_box(space):
    return (np.zeros(space.dim), 1.0)


def _resolve(V, space, box, opts, depth):
    if depth > space.dim + 1:
        return [fail(space, "recursion depth exceeded")]
    if space.n == 1:
        return [_one_dim(space, V, box)]
    if box is None and not space.is_sphere:
        box = _default_box(space)
    try:
        sol = kbd_solve(V, space, box=box, seed=opts.seed)
    except (KbdError, SpaceError) as exc:
        return [fail(space, f"KBD solve failed: {exc}")]
    if sol.dim - int(sol.includes_trivial) == 0:
        return [fail(space, "no nontrivial CT")]
    classes = branch_classes(sol, opts.seed, opts.n_random)
    if not classes:
        return [fail(space, "no nontrivial CT")]
    rng = np.random.default_rng([opts.seed, depth, 1])
    out, fails = [], []
    for key, L in classes:
        for t in _trees_for(L, key, V, space, box, opts, depth, rng):
            if t.resolved:
                out.append(t)
                if not opts.exhaustive or len(out) >= opts.max_trees:
                    return out
            else:
                fails.append(t)
    return out or fails


def bekm_separate(V, space, box=None, exhaustive=False, seed=0, max_trees=MAX_TREES, n_random=24):
    """First fully resolved SeparationTree (or all of them, up to max_trees, when exhaustive).

    A Fail tree is returned when nothing resolves.
    """
    opts = Options(exhaustive, seed, box, n_random, max_trees)
    trees = _resolve(V, space, box, opts, 0)
    if exhaustive:
        return trees
    return trees[0]


# -- Killing-Stackel space --------------------------------------------------

def _benenti_constant(Lb, eta):
    """Benenti sequence of a constant tensor on a flat factor with metric diag(eta)."""
    g = np.diag(eta)
    m = len(eta)
    K = [np.diag(eta)]
    for a in range(1, m):
        KgL = K[-1] @ g @ Lb
        K.append(np.trace(KgL @ g) / a * np.diag(eta) - KgL)
    return K


def _lift_axis(split, K):
    E = split.basis
    eta = split.eta
    P = np.diag(eta) @ E.T @ split.space.g
    q = -P @ split.x0
    comp = K.components.compose_affine(P, q)
    return E @ comp @ E.T


def _lift_central(split, K):
    kappa = split.fiber.kappa
    diag = kappa * split.space.signs
    parts = K.components.homogeneous_parts()
    if any(d % 2 for d in parts):
        raise UnresolvedTree("fiber tensor has odd-degree terms")
    D = max(max(parts), 2)
    n = split.space.dim
    s = PolyMat(n, (), {})
    for i in range(n):
        e = [0] * n
        e[i] = 2
        s = s + PolyMat(n, (), {tuple(e): diag[i]})
    acc = PolyMat(n, K.components.shape, {})
    for d, H in parts.items():
        term = H
        for _ in range((D - d) // 2):
            term = term * s
        acc = acc + term
    for _ in range((D - 2) // 2):
        acc = acc.divide_quadratic(diag)
    return acc.compose_affine(np.eye(n), -split.x0)


def ks_space(tree):
    """n Killing tensors (G first) whose quadratic integrals commute."""
    if not tree.resolved:
        raise UnresolvedTree("tree is not fully resolved")
    sp = tree.space
    if sp.n == 1:
        return [KillingTensorField(sp, metric_field(sp), "K0")]
    if not tree.warped:
        return benenti_sequence(tree.ct)
    if len(tree.warped) != 1:
        raise UnresolvedTree("several multidimensional eigenspaces at one level")
    node = tree.warped[0]
    split = node.split
    g = sp.g
    n = sp.dim
    fiber_ks = ks_space(node.child)
    out = []
    if split.kind == "axis":
        E = split.basis
        GF = E @ np.diag(split.eta) @ E.T
        # geodesic factor: the simple eigen-directions of the constant tensor
        Bv = np.column_stack([lf.direction for lf in tree.leaves]) if tree.leaves else np.zeros((n, 0))
        if Bv.shape[1]:
            Eb = _g_orthonormal(Bv, g)
            eta_b = np.diag(Eb.T @ g @ Eb)
            Lb = np.diag(eta_b) @ Eb.T @ g @ tree.ct.A @ g @ Eb @ np.diag(eta_b)
            Kb = _benenti_constant(Lb, eta_b)
            c = split.eigenvalue
            sig = [1.0]
            for i in range(1, len(Kb) + 1):
                sig.append(np.trace(Kb[i - 1] @ np.diag(eta_b) @ Lb @ np.diag(eta_b)) / i)
            for a, Ka in enumerate(Kb):
                coef = sum((-c) ** i * sig[a - i] for i in range(a + 1))
                M = Eb @ Ka @ Eb.T + coef * GF
                out.append(KillingTensorField(sp, PolyMat.constant(M, n), f"K{a}"))
        for j, Kf in enumerate(fiber_ks):
            out.append(KillingTensorField(sp, _lift_axis(split, Kf).prune(), f"F{j}"))
    else:
        out.append(KillingTensorField(sp, metric_field(sp), "K0"))
        for j, Kf in enumerate(fiber_ks):
            out.append(KillingTensorField(sp, _lift_central(split, Kf).prune(), f"F{j}"))
    return out


# -- frames and DOT ---------------------------------------------------------

def tree_frame(tree, x):
    """Columns spanning the coordinate directions of the tree's web at x."""
    x = np.asarray(x, dtype=float)
    if tree.space.n == 1 and tree.ct is None:
        if tree.space.is_sphere:
            return _tangent(tree.space, x)
        return np.eye(tree.space.dim)
    es = eigenfunctions(tree.ct, x)
    cols = []
    wi = iter(tree.warped)
    for mult, E in zip(es.multiplicities, es.spaces):
        if mult == 1:
            cols.append(E)
            continue
        node = next(wi)
        sp = node.split
        y = sp.to_fiber(x)[0]
        Fy = tree_frame(node.child, y)
        cols.append(sp.basis @ Fy if sp.kind == "axis" else Fy)
    return np.column_stack(cols)


def to_dot(tree, name="sep"):
    lines = [f"digraph {name} {{", "  node [shape=box];"]
    counter = itertools.count()

    def walk(t):
        me = f"n{next(counter)}"
        if t.kind == FAIL:
            lines.append(f'  {me} [label="Fail\\n{t.space.name}\\n{t.reason[:60]}"];')
            return me
        cls = t.key[0] if t.key else ""
        lines.append(f'  {me} [label="{t.space.name}\\n{t.name}\\n{cls}"];')
        for lf in t.leaves:
            c = f"n{next(counter)}"
            lines.append(f'  {c} [shape=ellipse,label="{lf.eigenvalue:.4g}"];')
            lines.append(f"  {me} -> {c};")
        for w in t.warped:
            c = walk(w.child)
            lines.append(f'  {me} -> {c} [label="{w.split.kind} rho"];')
        return me

    walk(tree)
    lines.append("}")
    return "\n".join(lines) + "\n"
