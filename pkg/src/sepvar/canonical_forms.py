"""Metric-Jordan canonical form and the classification of flat concircular tensors.

A self-adjoint T on (R^n, g) splits into blocks J_k(lam) on which the metric
is eps*S_k (S_k = anti-diagonal ones).  Blocks are found per eigenvalue
cluster: a sorted Schur form isolates the generalized eigenspace, ranks of
powers of the nilpotent part give the sizes, and a recursive chain
construction recovers the signs.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import least_squares

from .concircular import ConcircularTensor, shift_origin
from .pseudo_space import PseudoSpace, SpaceError, vec_to_json

EPS = np.finfo(float).eps
MAX_DIM = 6

CENTRAL = "Central"
NON_NULL_AXIAL = "NonNullAxial"
NULL_AXIAL = "NullAxial"
CARTESIAN = "Cartesian"
DEGENERATE_NULL_AXIAL = "DegenerateNullAxial"
TAGS = (CENTRAL, NON_NULL_AXIAL, NULL_AXIAL, CARTESIAN, DEGENERATE_NULL_AXIAL)


class ClassificationError(ValueError):
    pass


class AmbiguityError(ClassificationError):
    """Numerical data sits too close to a change of structure."""


class DegenerateNullAxialError(ClassificationError):
    pass


class TrivialCTError(ClassificationError):
    """L is a constant multiple of the metric."""


class NotSelfAdjoint(ClassificationError):
    pass


@dataclass(frozen=True)
class JordanBlock:
    size: int
    sign: int
    eigenvalue: complex

    def key(self, digits=6):
        lam = complex(self.eigenvalue)
        return (round(lam.real, digits) + 0.0, round(lam.imag, digits) + 0.0, self.size, self.sign)

    def to_json(self):
        lam = complex(self.eigenvalue)
        return {"size": self.size, "sign": self.sign, "re": lam.real, "im": lam.imag}


@dataclass
class JordanBlockSpec:
    blocks: list
    basis: np.ndarray = field(repr=False)

    def multiset(self, digits=6):
        return sorted(b.key(digits) for b in self.blocks)

    def pattern(self):
        """Eigenvalue-free shape: sorted (size, sign, is_complex) per block, grouped by eigenvalue."""
        groups = {}
        for b in self.blocks:
            groups.setdefault(b.key(6)[:2], []).append((b.size, b.sign))
        return sorted((abs(k[1]) > 0, tuple(sorted(v))) for k, v in groups.items())

    def to_json(self):
        return [b.to_json() for b in sorted(self.blocks, key=lambda b: b.key())]


# -- metric-Jordan form --------------------------------------------------------

def _cluster(eigs, radius):
    n = len(eigs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= radius:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(eigs[idx]) for idx in groups.values()]


def _ranks(N, thr):
    k = N.shape[0]
    ranks = [k]
    P = np.eye(k, dtype=N.dtype)
    scale = max(1.0, np.abs(N).max(initial=0.0))
    for j in range(1, k + 1):
        P = P @ N
        s = np.linalg.svd(P, compute_uv=False)
        ranks.append(int(np.sum(s > thr * scale ** j)))
        if ranks[-1] == 0:
            break
    return ranks


def _inv_sqrt_series(r, p):
    """Coefficients of r(s)^{-1/2} mod s^p (r[0] != 0)."""
    q = np.zeros(p, dtype=complex if np.iscomplexobj(r) else float)
    q[0] = 1.0 / np.sqrt(r[0] + 0j) if np.iscomplexobj(r) else 1.0 / np.sqrt(r[0])
    # q^2 r = 1: solve term by term
    for j in range(1, p):
        # coefficient j of q^2 r with q[j] unknown: 2 q0 q[j] r0 + rest = 0
        qq = np.convolve(q[:j], q[:j])[:j + 1]
        qq = np.concatenate([qq, np.zeros(j + 1 - len(qq))])
        rest = sum(qq[i] * r[j - i] for i in range(j + 1) if j - i < len(r))
        q[j] = -rest / (2 * q[0] * r[0])
    return q


def _pick_vector(B, complex_mode):
    """A vector x with x^T B x as large as possible (B symmetric)."""
    if not complex_mode:
        vals, vecs = np.linalg.eigh(B)
        i = int(np.argmax(np.abs(vals)))
        return vecs[:, i], int(np.sign(vals[i]))
    _, _, vh = np.linalg.svd(B)
    cands = [v for v in vh.conj()]
    cands += [a + b for i, a in enumerate(cands) for b in cands[i + 1:]]
    best = max(cands, key=lambda v: abs(v @ B @ v) / max(np.vdot(v, v).real, 1e-300))
    return best, 1


def _chains(N, Gm, thr, complex_mode):
    """Split the nilpotent N (self-adjoint for Gm) into skew-normal chains."""
    out = []
    U = np.eye(N.shape[0], dtype=N.dtype)
    while U.shape[1] > 0:
        NU = np.linalg.lstsq(U, N @ U, rcond=None)[0]
        GU = U.T @ Gm @ U
        d = NU.shape[0]
        scale = max(1.0, np.abs(NU).max(initial=0.0))
        powers = [np.eye(d, dtype=NU.dtype)]
        p = 1
        while p < d:
            nxt = powers[-1] @ NU
            if np.abs(nxt).max(initial=0.0) <= thr * scale ** p * 10:
                break
            powers.append(nxt)
            p += 1
        B = GU @ powers[p - 1]
        B = 0.5 * (B + B.T)
        x, eps = _pick_vector(B, complex_mode)
        f = np.array([eps * (x @ GU @ powers[j] @ x) for j in range(p)])
        r = f[::-1]
        q = _inv_sqrt_series(r, p)
        xp = sum(q[j] * (powers[j] @ x) for j in range(p))
        E = np.stack([powers[j] @ xp for j in range(p)], axis=1)
        out.append((p, eps, U @ E))
        # G-orthogonal complement inside the current subspace
        C = E.T @ GU
        _, s, vh = np.linalg.svd(C)
        comp = vh[p:].conj().T
        U = U @ comp
    return out


def metric_jordan_form(T, space, tol=None):
    """Metric-Jordan blocks of the endomorphism T with respect to the metric of space."""
    if isinstance(space, PseudoSpace):
        g = space.g
    else:
        g = np.asarray(space, dtype=float)
    T = np.asarray(getattr(T, "components", T), dtype=float)
    n = T.shape[0]
    if n > MAX_DIM:
        raise SpaceError("dimension above 6 is not supported")
    normT = max(np.linalg.norm(T, 2), 1e-300)
    if tol is None:
        tol = 1e-8 * normT
    gT = g @ T
    if np.abs(gT - gT.T).max() > max(tol, 1e-10 * normT):
        raise NotSelfAdjoint("operator is not self-adjoint for the metric")
    radius = max(tol, (1e3 * EPS) ** (1.0 / n) * normT)
    eigs = np.linalg.eigvals(T)
    groups = _cluster(eigs, radius)
    centers = [grp.mean() for grp in groups]
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            gap = np.min(np.abs(groups[i][:, None] - groups[j][None, :]))
            if gap < 10 * radius:
                raise AmbiguityError(
                    f"eigenvalue clusters {centers[i]:.6g} and {centers[j]:.6g} are {gap:.3g} apart "
                    f"(resolution {radius:.3g})")
    blocks, basis = [], []
    thr = 1e-9
    for grp, mu in zip(groups, centers):
        k = len(grp)
        is_real = abs(mu.imag) <= radius
        if not is_real and mu.imag < 0:
            continue
        sel = 3 * radius
        if is_real:
            mu = mu.real

            def pick(x, y, mu=mu):
                return abs(complex(x, y) - mu) <= sel
            S, Z, sdim = sla.schur(T, output="real", sort=pick)
            W = Z[:, :sdim]
            Gm = W.T @ g @ W
        else:
            def pick(z, mu=mu):
                return abs(z - mu) <= sel
            S, Z, sdim = sla.schur(T.astype(complex), output="complex", sort=pick)
            W = Z[:, :sdim]
            Gm = W.T @ g @ W
        if sdim != k:
            raise AmbiguityError(f"could not isolate the cluster at {mu:.6g}")
        S11 = np.linalg.lstsq(W, T @ W, rcond=None)[0]
        mu = np.trace(S11) / k
        if is_real:
            mu = float(np.real(mu))
        N = S11 - mu * np.eye(k)
        chains = _chains(N, Gm, thr, not is_real)
        r = _ranks(N, thr)
        # number of blocks of size >= j is r[j-1] - r[j]
        from_ranks = sorted(j for j in range(1, len(r)) for _ in range(
            (r[j - 1] - r[j]) - ((r[j] - r[j + 1]) if j + 1 < len(r) else 0)))
        if sorted(c[0] for c in chains) != from_ranks:
            raise AmbiguityError(f"block sizes at {mu:.6g} are not numerically determined")
        for size, eps, E in chains:
            blocks.append(JordanBlock(size, int(eps), complex(mu)))
            basis.append(W @ E)
            if not is_real:
                blocks.append(JordanBlock(size, 1, complex(np.conj(mu))))
                basis.append((W @ E).conj())
    B = np.concatenate(basis, axis=1)
    if B.shape[1] != n:
        raise AmbiguityError("block sizes do not add up")
    if np.isrealobj(B) or np.abs(B.imag).max() == 0:
        B = B.real
    return JordanBlockSpec(blocks, B)


def shift_operator(k):
    return np.fliplr(np.eye(k))


def jordan_block(k, lam):
    """J_k(lam) acting as e_j -> lam e_j + e_{j+1} (ones below the diagonal)."""
    return lam * np.eye(k) + np.eye(k, k=-1)


def _realify(k, lam):
    J = jordan_block(k, lam)
    S = shift_operator(k)
    Tc = sla.block_diag(J, np.conj(J))
    gc = sla.block_diag(S, S)
    M = np.zeros((2 * k, 2 * k), dtype=complex)
    for j in range(k):
        M[j, j] = 1 / np.sqrt(2)
        M[k + j, j] = 1 / np.sqrt(2)
        M[j, k + j] = 1 / (1j * np.sqrt(2))
        M[k + j, k + j] = -1 / (1j * np.sqrt(2))
    Tr = np.linalg.solve(M, Tc @ M)
    gr = M.T @ gc @ M
    return Tr.real, gr.real


def canonical_pair(blocks):
    """(T, g) in the canonical basis for a list of JordanBlock (complex blocks given once, im > 0)."""
    Ts, gs = [], []
    for b in blocks:
        lam = complex(b.eigenvalue)
        if abs(lam.imag) > 0:
            Tr, gr = _realify(b.size, lam)
            Ts.append(Tr)
            gs.append(gr)
        else:
            Ts.append(jordan_block(b.size, lam.real))
            gs.append(b.sign * shift_operator(b.size))
    return sla.block_diag(*Ts), sla.block_diag(*gs)


def to_standard(Tc, gc):
    """Real P with P^T g_std P = gc; returns (T_std, g_std)."""
    vals, V = np.linalg.eigh(gc)
    order = np.argsort(np.sign(vals), kind="stable")
    vals, V = vals[order], V[:, order]
    P = np.diag(np.sqrt(np.abs(vals))) @ V.T
    gstd = np.diag(np.sign(vals))
    return P @ Tc @ np.linalg.inv(P), gstd


def random_pseudo_orthogonal(g, rng, scale=0.3, max_cond=10.0):
    """Cayley transform (I - S)^{-1}(I + S) with g S antisymmetric.

    Boosts can be arbitrarily ill-conditioned; draws above max_cond are rejected.
    """
    n = g.shape[0]
    while True:
        X = rng.normal(scale=scale, size=(n, n))
        X = X - X.T
        S = np.linalg.inv(g) @ X
        Q = np.linalg.solve(np.eye(n) - S, np.eye(n) + S)
        if np.linalg.cond(Q) <= max_cond:
            return Q


def random_block_spec(rng, n, gap=0.7, allow_complex=True):
    """Random list of JordanBlock with eigenvalues at least ``gap`` apart."""
    blocks = []
    used = []

    def new_eig(cplx):
        while True:
            lam = complex(rng.uniform(-2, 2), rng.uniform(0.6, 1.6) if cplx else 0.0)
            pts = [lam, lam.conjugate()] if cplx else [lam]
            if all(abs(p - q) > gap for p in pts for q in used):
                used.extend(pts)
                return lam

    left = n
    while left > 0:
        if allow_complex and left >= 2 and rng.random() < 0.25:
            k = int(rng.integers(1, left // 2 + 1))
            k = min(k, 2)
            blocks.append(JordanBlock(k, 1, new_eig(True)))
            left -= 2 * k
            continue
        k = int(rng.integers(1, min(left, 3) + 1))
        lam = new_eig(False) if not blocks or rng.random() < 0.6 else None
        if lam is None:
            reals = [b.eigenvalue for b in blocks if complex(b.eigenvalue).imag == 0]
            lam = reals[int(rng.integers(len(reals)))] if reals else new_eig(False)
        blocks.append(JordanBlock(k, int(rng.choice([-1, 1])), complex(lam)))
        left -= k
    return blocks


def expected_multiset(blocks, digits=6):
    out = []
    for b in blocks:
        out.append(b.key(digits))
        lam = complex(b.eigenvalue)
        if lam.imag != 0:
            out.append(JordanBlock(b.size, 1, lam.conjugate()).key(digits))
    return sorted(out)


# -- concircular tensor invariants -------------------------------------------

def _param_scale(L):
    return max(np.abs(L.A).max(initial=0.0), np.abs(L.w).max(initial=0.0), abs(L.m), 1e-300)


def omegas(L, kmax=None):
    g = L.space.g
    n = L.space.dim
    kmax = n if kmax is None else kmax
    M = L.A @ g
    out = [L.m]
    v = L.w.copy()
    for _ in range(1, kmax + 1):
        out.append(float(L.w @ g @ v))
        v = M @ v
    return np.array(out)


def ct_invariants(L, tol=1e-9):
    """(k, eps): first k with omega_k != 0, eps = 1 for even k else sign(omega_k)."""
    if L.space.is_sphere:
        raise SpaceError("invariants are defined for flat-space tensors")
    P = _param_scale(L)
    om = omegas(L)
    for k, wk in enumerate(om):
        t = tol * P ** (k + 1)
        if abs(wk) < t:
            continue
        if abs(wk) < 10 * t:
            raise AmbiguityError(f"omega_{k} = {wk:.3g} is within the ambiguity band [{t:.3g}, {10 * t:.3g})")
        return k, (1 if k % 2 == 0 else int(np.sign(wk)))
    return None, None


@dataclass
class CanonicalClass:
    tag: str
    index: int = None
    sign: int = None
    normalized_ct: ConcircularTensor = None
    a: float = None
    b: float = None
    shift: np.ndarray = None
    blocks: JordanBlockSpec = None

    def to_json(self):
        return {
            "tag": self.tag, "index": self.index, "sign": self.sign,
            "blocks": self.blocks.to_json() if self.blocks is not None else None,
            "normalization": None if self.a is None else
            {"a": self.a, "b": self.b, "shift": vec_to_json(self.shift)},
            "normalized_ct": self.normalized_ct.to_json() if self.normalized_ct is not None else None,
        }


def _is_trivial(L, tol):
    P = _param_scale(L)
    if np.abs(L.w).max() > tol * P or abs(L.m) > tol * P:
        return False
    M = L.A @ L.space.g
    c = np.trace(M) / L.space.dim
    return np.abs(M - c * np.eye(L.space.dim)).max() <= tol * P


def _restricted(M, g, w):
    # matrix of the endomorphism M on the g-orthogonal complement of w
    _, _, vh = np.linalg.svd((g @ w)[None, :])
    B = vh[1:].T
    return np.linalg.lstsq(B, M @ B, rcond=None)[0]


def _min_real(eigs):
    re = [e.real for e in eigs if abs(e.imag) <= 1e-9 * (1 + abs(e))]
    return min(re) if re else min(e.real for e in eigs)


def reduce_geometric(L, tol=1e-9):
    """(a, b, x0, L_norm) with L_norm = a * shift_origin(L, x0) + b * G."""
    if L.space.is_sphere:
        raise SpaceError("reduction is defined for flat-space tensors")
    if _is_trivial(L, tol):
        raise TrivialCTError("L is a multiple of the metric")
    g = L.space.g
    n = L.space.dim
    k, eps = ct_invariants(L, tol)
    if k == 0:
        x0 = -L.w / L.m
        a = 1.0 / L.m
        S = shift_origin(L, x0)
        b = -_min_real(np.linalg.eigvals(a * S.A @ g))
    elif k == 1:
        om = omegas(L, 2)
        w1, w2 = om[1], om[2]
        c = -w2 / (2 * w1)
        x0 = -(L.A @ g @ L.w + c * L.w) / w1
        S = shift_origin(L, x0)
        a = 1.0 / np.sqrt(abs(w1))
        lo = _min_real(np.linalg.eigvals(_restricted(a * S.A @ g, g, L.w))) if n > 1 else 0.0
        # slide along w and add b G so that the complement starts at 0 while A w = 0 survives
        s = lo / (2 * a * w1)
        x0 = x0 + s * L.w
        S = shift_origin(L, x0)
        b = -lo
    elif k is not None:
        wk = omegas(L, k)[k]
        a = abs(wk) ** (-1.0 / (k + 1))
        if k % 2 == 0:
            a *= np.sign(wk)
        x0, b = _null_axial_shift(L, a, k)
        S = shift_origin(L, x0)
    else:
        if np.abs(L.w).max() > tol * _param_scale(L):
            raise DegenerateNullAxialError("all omega_k vanish with w != 0 (degenerate null axial)")
        x0 = np.zeros(n)
        S = L
        ev = np.linalg.eigvals(L.A @ g)
        re = sorted(e.real for e in ev if abs(e.imag) <= 1e-9 * (1 + abs(e)))
        if not re:
            re = sorted(e.real for e in ev)
        lo, hi = re[0], re[-1]
        if hi - lo > 1e-9 * (1 + abs(hi)):
            a = 1.0 / (hi - lo)
        else:
            a = 1.0
        b = -a * lo
    Ln = S.scaled(a, b)
    Ln = _clean(Ln)
    return float(a), float(b), np.asarray(x0, dtype=float), Ln


def _clean(L, tol=1e-12):
    A = np.where(np.abs(L.A) < tol, 0.0, L.A)
    w = np.where(np.abs(L.w) < tol, 0.0, L.w)
    m = 0.0 if abs(L.m) < tol else L.m
    return ConcircularTensor(L.space, A, w, m)


def _null_axial_shift(L, a, k):
    """Origin shift x0 and b with (A_n g)^k w_n = 0 for A_n = a A' + b g^{-1}, w_n = a w."""
    g = L.space.g
    gi = L.space.ginv
    n = L.space.dim
    As, ws = a * L.A, a * L.w

    def resid(p):
        x0, b = p[:n], p[n]
        A2 = As + np.outer(ws, x0) + np.outer(x0, ws) + b * gi
        v = ws.copy()
        M = A2 @ g
        for _ in range(k):
            v = M @ v
        return v

    best = None
    rng = np.random.default_rng(12345)
    for trial in range(40):
        p0 = np.zeros(n + 1) if trial == 0 else rng.normal(scale=1.0 + trial / 10, size=n + 1)
        sol = least_squares(resid, p0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        r = np.abs(resid(sol.x)).max()
        if best is None or r < best[0]:
            best = (r, sol.x)
        if r < 1e-12:
            break
    if best[0] > 1e-9:
        raise ClassificationError(f"null axial normal form not reached (residual {best[0]:.3g})")
    x0 = best[1][:n]
    return x0, float(best[1][n])


def null_chain(L, k):
    """Skew-normal chain e_j = (A g)^{j-1} w and its Gram matrix."""
    g = L.space.g
    M = L.A @ g
    E = [L.w]
    for _ in range(k - 1):
        E.append(M @ E[-1])
    E = np.stack(E, axis=1)
    return E, E.T @ g @ E


def classify_ct(L, tol=1e-9):
    k, eps = ct_invariants(L, tol)
    if k is None:
        if np.abs(L.w).max() > tol * _param_scale(L):
            raise DegenerateNullAxialError("all omega_k vanish with w != 0 (degenerate null axial)")
        tag = CARTESIAN
    elif k == 0:
        tag = CENTRAL
    elif k == 1:
        tag = NON_NULL_AXIAL
    else:
        tag = NULL_AXIAL
    cls = CanonicalClass(tag, k, eps)
    try:
        a, b, x0, Ln = reduce_geometric(L, tol)
    except TrivialCTError:
        return cls
    cls.a, cls.b, cls.shift, cls.normalized_ct = a, b, x0, Ln
    if tag == NULL_AXIAL:
        _, gram = null_chain(Ln, k)
        target = eps * shift_operator(k)
        if np.abs(gram - target).max() > 1e-7:
            raise ClassificationError("skew-normal chain check failed")
    try:
        cls.blocks = metric_jordan_form(Ln.A @ L.space.g, L.space, tol=1e-8 * max(1.0, np.abs(Ln.A).max()))
    except ClassificationError:
        cls.blocks = None
    return cls
