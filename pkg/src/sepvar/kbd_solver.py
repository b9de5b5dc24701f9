"""The Killing-Bertrand-Darboux equation d(K dV) = 0 as a linear nullspace problem.

K = tr(L) G - L is linear in the concircular parameters, so sampling the
2-form d(K dV) at many points gives a tall linear system whose right
singular vectors with tiny singular values span the compatible tensors.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import subspace_angles

from .concircular import ConcircularTensor, isometry, kbdt, sample_sphere
from .pseudo_space import SpaceError


class KbdError(ValueError):
    pass


class SingularityError(KbdError):
    pass


@dataclass
class KbdSolution:
    space: object
    basis: list
    singular_values: np.ndarray = field(repr=False)
    includes_trivial: bool = True
    sample_box: tuple = None
    params: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self):
        return len(self.basis)

    def to_json(self):
        return {
            "dim": self.dim,
            "includes_trivial": self.includes_trivial,
            "basis": [L.to_json() for L in self.basis],
            "singular_values": [float(s) for s in self.singular_values],
        }


def n_params(space):
    d = space.dim
    if space.is_sphere:
        return d * (d + 1) // 2
    return d * (d + 1) // 2 + d + 1


def _param_basis(space):
    return [ConcircularTensor.from_params(space, e) for e in np.eye(n_params(space))]


def _two_form_rows(space, Ks, dKs, grad, hess, X):
    """Rows of d(K dV) for each basis tensor: returns (m, n_pairs, n_params)."""
    g = space.g
    m, d = X.shape
    if space.is_sphere:
        T = np.stack([_tangent(space, x) for x in X])  # (m, d, n)
    pairs = [(i, j) for i in range(space.n) for j in range(i + 1, space.n)] if space.is_sphere \
        else [(i, j) for i in range(d) for j in range(i + 1, d)]
    out = np.empty((m, len(pairs), len(Ks)))
    for p, (Kv, dKv) in enumerate(zip(Ks, dKs)):
        M = np.einsum("ab,mbc->mac", g, Kv)          # M_jk = (g K)_jk
        dM = np.einsum("ab,imbc->miac", g, dKv)      # dM[m, i, j, k] = d_i M_jk
        dtheta = np.einsum("mijk,mk->mij", dM, grad) + np.einsum("mjk,mik->mij", M, hess)
        F = dtheta - dtheta.transpose(0, 2, 1)
        if space.is_sphere:
            F = np.einsum("mia,mij,mjb->mab", T, F, T)
        for q, (i, j) in enumerate(pairs):
            out[:, q, p] = F[:, i, j]
    return out


def _tangent(space, x):
    n = space.g @ x
    _, _, vt = np.linalg.svd(n[None, :])
    return vt[1:].T


def _fields(space):
    Ks, dKs = [], []
    for L in _param_basis(space):
        F = kbdt(L).components
        Ks.append(F)
        dKs.append(F.gradient())
    return Ks, dKs


def _eval_fields(Ks, dKs, X):
    Kv = [K(X) for K in Ks]
    dKv = [np.stack([dk(X) for dk in dK]) for dK in dKs]
    return Kv, dKv


def sample_points(V, space, center, half_width, n, rng, max_factor=10):
    """Uniform samples in the box (or on the sphere) where V and its derivatives are finite."""
    center = np.asarray(center, dtype=float)
    got = []
    tries = 0
    while sum(len(g) for g in got) < n:
        if tries > max_factor:
            raise SingularityError("too many samples hit singularities of the potential")
        tries += 1
        if space.is_sphere:
            X = sample_sphere(space, rng, n)
        else:
            X = center + rng.uniform(-half_width, half_width, size=(n, space.dim))
        with np.errstate(all="ignore"):
            ok = np.isfinite(V.value(X)) & np.all(np.isfinite(V.grad(X)), axis=1) \
                & np.all(np.isfinite(V.hessian(X)), axis=(1, 2))
        got.append(X[ok])
    return np.concatenate(got)[:n]


def kbd_system(V, space, X):
    """Row-scaled linear system for the samples X (already in solver coordinates)."""
    Ks, dKs = _fields(space)
    Kv, dKv = _eval_fields(Ks, dKs, X)
    grad = V.grad(X)
    hess = V.hessian(X)
    R = _two_form_rows(space, Kv, dKv, grad, hess, X)
    scale = 1.0 + np.linalg.norm(grad, axis=1) + np.linalg.norm(hess, axis=(1, 2))
    R = R / scale[:, None, None]
    return R.reshape(-1, R.shape[-1])


class _Shifted:
    """V(c + y) without touching the AST."""

    def __init__(self, V, c):
        self.V, self.c = V, np.asarray(c, dtype=float)

    def value(self, Y):
        return self.V.value(np.asarray(Y) + self.c)

    def grad(self, Y):
        return self.V.grad(np.asarray(Y) + self.c)

    def hessian(self, Y):
        return self.V.hessian(np.asarray(Y) + self.c)


def _nullspace(R, svd_tol, gap):
    if R.size == 0 or np.abs(R).max() == 0:
        return np.eye(R.shape[1]), np.zeros(R.shape[1])
    cn = np.linalg.norm(R, axis=0)
    cn[cn == 0] = 1.0
    Rs = R / cn
    _, s, vt = np.linalg.svd(Rs, full_matrices=True)
    s_full = np.zeros(R.shape[1])
    s_full[:len(s)] = s
    smax = s_full.max()
    null = s_full < svd_tol * smax
    k = int(null.sum())
    if 0 < k < len(s_full):
        keep_min = s_full[~null].min()
        drop_max = s_full[null].max()
        if drop_max > 0 and keep_min / drop_max < gap:
            raise KbdError(f"no clear spectral gap: kept {keep_min:.3g} vs dropped {drop_max:.3g}")
    N = vt[null].T / cn[:, None]
    return N, s_full


def _orthonormal(P):
    q, r = np.linalg.qr(P)
    # fix signs so output is reproducible
    sgn = np.sign(np.diag(r))
    sgn[sgn == 0] = 1
    return q * sgn


def _canonical_basis(P, space):
    """Deterministic orthonormal basis: G first (if present), then the rest reduced."""
    g_par = ConcircularTensor(space, space.ginv).params
    g_par = g_par / np.linalg.norm(g_par)
    Q = _orthonormal(P)
    coef = Q.T @ g_par
    trivial = np.linalg.norm(Q @ coef - g_par) < 1e-6
    if trivial:
        rest = Q - np.outer(g_par, g_par) @ Q
        u, s, _ = np.linalg.svd(rest, full_matrices=False)
        rest = u[:, :Q.shape[1] - 1]
        # pivot-free canonical choice: rotate so the leading entries form an echelon shape
        if rest.shape[1]:
            qq, rr = np.linalg.qr(rest.T)
            rest = rr.T
            rest = _orthonormal(rest)
        Q = np.column_stack([g_par, rest]) if rest.shape[1] else g_par[:, None]
    return Q, trivial


def kbd_solve(V, space, box=None, n_samples=None, svd_tol=1e-9, seed=0, gap=1e3, check_stability=True):
    """Nullspace of the KBD system.  box = (center, half_width)."""
    d = space.dim
    npar = n_params(space)
    if n_samples is None:
        n_samples = 10 * npar
    if n_samples < 5 * npar:
        raise KbdError(f"need at least {5 * npar} samples, got {n_samples}")
    if box is None:
        box = (np.zeros(d), 1.0)
    center, hw = np.asarray(box[0], dtype=float), float(box[1])
    rng = np.random.default_rng(seed)
    if space.is_sphere:
        Vy, c = V, np.zeros(d)
    else:
        Vy, c = _Shifted(V, center), center
    Y = sample_points(Vy, space, np.zeros(d), hw, n_samples, rng)
    R = kbd_system(Vy, space, Y)
    N, s = _nullspace(R, svd_tol, gap)
    if check_stability and N.shape[1] < npar:
        Y2 = sample_points(Vy, space, np.zeros(d), hw, 2 * n_samples, np.random.default_rng([seed, 1]))
        N2, _ = _nullspace(kbd_system(Vy, space, Y2), svd_tol, gap)
        if N2.shape[1] != N.shape[1]:
            raise KbdError(f"nullspace dimension unstable under resampling: {N.shape[1]} vs {N2.shape[1]}")
        if N.shape[1] and np.max(subspace_angles(N, N2)) > 1e-4:
            raise KbdError("nullspace direction unstable under resampling")
    # back to the original coordinates: x = y + c
    params = []
    for col in N.T:
        L = ConcircularTensor.from_params(space, col)
        if not space.is_sphere:
            L = isometry(L, np.eye(d), c)
        params.append(L.params)
    P = np.array(params).T if params else np.zeros((npar, 0))
    if P.shape[1]:
        P, trivial = _canonical_basis(P, space)
    else:
        trivial = False
    basis = [ConcircularTensor.from_params(space, p) for p in P.T]
    return KbdSolution(space, basis, s, trivial, (center, hw), P)


def dkdv_residual(L, V, points):
    """max |d(K dV)| for K = kbdt(L) (or a KillingTensorField) at the points."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(L, ConcircularTensor):
        K = kbdt(L)
    else:
        K = L
    space = K.space
    F = K.components
    Kv = F(X)
    dKv = np.stack([dk(X) for dk in F.gradient()])
    R = _two_form_rows(space, [Kv], [dKv], V.grad(X), V.hessian(X), X)
    return float(np.abs(R).max()) if R.size else 0.0


def one_form(K, V, X):
    """theta = K dV lowered: theta_j = (g K)_jk d_k V."""
    X = np.atleast_2d(X)
    return np.einsum("ab,mbc,mc->ma", K.space.g, K.components(X), V.grad(X))


def integrate_potential_U(K, V, base_point, target, n_nodes=24, closed_tol=1e-5):
    """U(target) - U(base) by Gauss-Legendre along the straight segment."""
    a = np.asarray(base_point, dtype=float)
    b = np.asarray(target, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    s = 0.5 * (nodes + 1.0)
    X = a + np.outer(s, b - a)
    with np.errstate(all="ignore"):
        vals = V.value(X)
        th = one_form(K, V, X)
    if not np.all(np.isfinite(vals)) or not np.all(np.isfinite(th)):
        raise SingularityError("segment crosses a singularity of the potential")
    if K.space.dim > 1:
        r = dkdv_residual(K, V, X)
        scale = 1.0 + np.abs(th).max()
        if r > closed_tol * scale:
            raise KbdError(f"K dV is not closed along the segment (residual {r:.3g})")
    return float(0.5 * np.sum(weights * (th @ (b - a))))


def integrate_polyline(K, V, pts, n_nodes=24):
    total = 0.0
    for p, q in zip(pts[:-1], pts[1:]):
        total += integrate_potential_U(K, V, p, q, n_nodes)
    return total
