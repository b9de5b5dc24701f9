"""Concircular tensors on flat pseudo-Euclidean spaces and their spheres.

Flat case: L(x) = A + w x^T + x w^T + m x x^T (contravariant, r = x).
Sphere case: only A is free and L = R A R^* with R = I - kappa x x^T g,
evaluated in ambient coordinates.  Everything is carried as polynomial
matrix fields so that Killing residuals can be differentiated exactly.
"""

from dataclasses import dataclass, field

import numpy as np

from .polyfield import PolyMat
from .pseudo_space import (CONTRAVARIANT, PseudoSpace, SpaceError, SymTensor2,
                           vec_to_json)

FLAT_DEGREE_CAP = 4
SPHERE_DEGREE_CAP = 8
MERGE_TOL = 1e-7


class NotOrthogonal(ValueError):
    """Spectrum at a point is complex or defective."""


@dataclass(frozen=True)
class ConcircularTensor:
    space: PseudoSpace
    A: np.ndarray = field(repr=False)
    w: np.ndarray = field(default=None, repr=False)
    m: float = 0.0

    def __post_init__(self):
        d = self.space.dim
        A = np.array(self.A, dtype=float).reshape(d, d)
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        if self.space.is_sphere:
            if self.w is not None and np.any(np.asarray(self.w) != 0) or self.m:
                raise SpaceError("sphere concircular tensors only carry A")
            w = np.zeros(d)
            object.__setattr__(self, "m", 0.0)
        else:
            w = np.zeros(d) if self.w is None else np.array(self.w, dtype=float).reshape(d)
            object.__setattr__(self, "m", float(self.m))
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def sphere_restricted(self):
        return self.space.is_sphere

    @property
    def params(self):
        """Flat parameter vector (A upper triangle, w, m)."""
        iu = np.triu_indices(self.space.dim)
        return np.concatenate([self.A[iu], self.w, [self.m]])

    @classmethod
    def from_params(cls, space, p):
        d = space.dim
        iu = np.triu_indices(d)
        k = len(iu[0])
        A = np.zeros((d, d))
        A[iu] = p[:k]
        A = A + A.T - np.diag(np.diag(A))
        if space.is_sphere:
            return cls(space, A)
        return cls(space, A, p[k:k + d], p[k + d])

    def field(self):
        F = self.__dict__.get("_field")
        if F is None:
            F = ct_field(self)
            object.__setattr__(self, "_field", F)
        return F

    def __call__(self, x):
        return self.field()(x)

    def scaled(self, a, b=0.0):
        """a*L + b*G (flat: G = g^{-1} is the constant part)."""
        if self.space.is_sphere:
            return ConcircularTensor(self.space, a * self.A + b * self.space.ginv)
        return ConcircularTensor(self.space, a * self.A + b * self.space.ginv, a * self.w, a * self.m)

    def to_json(self):
        d = {"space": self.space.to_json(), "A": self.A.tolist()}
        if not self.space.is_sphere:
            d["w"] = vec_to_json(self.w)
            d["m"] = float(self.m)
        return d

    @classmethod
    def from_json(cls, d):
        sp = PseudoSpace.from_json(d["space"])
        if sp.is_sphere:
            return cls(sp, np.array(d["A"]))
        return cls(sp, np.array(d["A"]), np.array(d["w"]), d["m"])


def metric_field(space):
    """Contravariant metric G as a polynomial field (tangential on spheres)."""
    d = space.dim
    G = PolyMat.constant(space.ginv, d)
    if space.is_sphere:
        r = PolyMat.position(d)
        G = G - r.outer(r) * space.kappa
    return G


def ct_field(L):
    sp = L.space
    d = sp.dim
    r = PolyMat.position(d)
    if not sp.is_sphere:
        F = PolyMat.constant(L.A, d)
        F = F + PolyMat.constant(L.w, d).outer(r) + r.outer(PolyMat.constant(L.w, d))
        if L.m:
            F = F + r.outer(r) * L.m
        return F.prune()
    k = sp.kappa
    g = sp.g
    xx = r.outer(r)
    Agxx = L.A @ g @ xx
    q = _quad(r, g @ L.A @ g)
    F = PolyMat.constant(L.A, d) - (Agxx + Agxx.T) * k + (q * xx) * (k * k)
    return F.prune()


def _quad(r, M):
    # x^T M x as a scalar polynomial
    d = r.nvars
    terms = {}
    for i in range(d):
        for j in range(d):
            if M[i, j] == 0:
                continue
            e = [0] * d
            e[i] += 1
            e[j] += 1
            e = tuple(e)
            terms[e] = terms.get(e, 0.0) + M[i, j]
    return PolyMat(d, (), terms)


def eval_ct(L, point, tol=1e-8):
    p = L.space.check_point(point, tol)
    return SymTensor2(L.field()(p), CONTRAVARIANT)


def isometry(L, Q, c):
    """Push L forward by x' = Q x + c (Q pseudo-orthogonal)."""
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(c, dtype=float)
    Qw = Q @ L.w
    A = Q @ L.A @ Q.T - np.outer(Qw, c) - np.outer(c, Qw) + L.m * np.outer(c, c)
    return ConcircularTensor(L.space, A, Qw - L.m * c, L.m)


def shift_origin(L, x0):
    """The same tensor field written in coordinates y = x - x0."""
    return isometry(L, np.eye(L.space.dim), -np.asarray(x0, dtype=float))


# -- characteristic polynomial and eigenfunctions ---------------------------

def _faddeev_leverrier(M):
    n = M.shape[0]
    c = np.zeros(n + 1)
    c[0] = 1.0
    Mk = np.zeros_like(M)
    I = np.eye(n)
    for k in range(1, n + 1):
        Mk = M @ Mk + c[k - 1] * I
        c[k] = -np.trace(M @ Mk) / k
    return c


def _tangent_basis(space, p):
    # orthonormal (Euclidean) basis of {v : <p, v> = 0}
    n = space.g @ p
    _, _, vt = np.linalg.svd(n[None, :])
    return vt[1:].T


def _endomorphism_at(L, p):
    """Matrix of L (as endomorphism) on the intrinsic tangent space, plus the basis used."""
    M = L.field()(p) @ L.space.g
    if not L.space.is_sphere:
        return M, np.eye(L.space.dim)
    T = _tangent_basis(L.space, p)
    return np.linalg.lstsq(T, M @ T, rcond=None)[0], T


def char_poly(L, point, tol=1e-8):
    """Monic coefficients of det(zI - L), highest power first."""
    p = L.space.check_point(point, tol)
    M, _ = _endomorphism_at(L, p)
    return _faddeev_leverrier(M)


def _polish(coeffs, r):
    dp = np.polyder(coeffs)
    d = np.polyval(dp, r)
    f = np.polyval(coeffs, r)
    scale = np.abs(coeffs).max() * max(1.0, abs(r)) ** (len(coeffs) - 1)
    if abs(d) > 1e-6 * scale:
        r = r - f / d
    return r


@dataclass
class Eigenstructure:
    values: np.ndarray
    multiplicities: list
    spaces: list

    @property
    def simple(self):
        return all(m == 1 for m in self.multiplicities)


def eigenfunctions(L, point, tol=1e-9):
    p = L.space.check_point(point, 1e-8)
    M, T = _endomorphism_at(L, p)
    coeffs = _faddeev_leverrier(M)
    scale = 1.0 + np.abs(M).max(initial=0.0)
    n = M.shape[0]
    # eigenvalues of M itself: a semisimple k-fold eigenvalue moves by O(eps)
    # here, while companion roots of the polynomial smear to O(eps^(1/k))
    roots = np.linalg.eigvals(M) if n else np.array([])
    if np.any(np.abs(roots.imag) > max(tol, 1e-7) * scale):
        raise NotOrthogonal("complex eigenvalues at this point")
    roots = np.sort(np.array([_polish(coeffs, r) for r in roots.real]))
    groups = []
    for r in roots:
        if groups and abs(r - groups[-1][-1]) <= MERGE_TOL * (1 + abs(r)) * scale:
            groups[-1].append(r)
        else:
            groups.append([r])
    vals, mults, spaces = [], [], []
    for grp in groups:
        lam = float(np.mean(grp))
        k = len(grp)
        s, vt = np.linalg.svd(M - lam * np.eye(n))[1:]
        null = vt[n - k:].T
        # geometric multiplicity check
        if k > 1 and s[n - k] > 1e-6 * scale:
            raise NotOrthogonal(f"defective eigenvalue {lam:.6g}")
        vals.append(lam)
        mults.append(k)
        spaces.append(T @ null)
    return Eigenstructure(np.array(vals), mults, spaces)


def central_inverse(lams, roots):
    """Squares of Cartesian coordinates from eigenfunctions of diag(lams) + r r^T.

    Euclidean central tensor: x_i^2 = -prod_j(lam_i - u_j) / prod_{k != i}(lam_i - lam_k).
    """
    lams = np.asarray(lams, dtype=float)
    out = np.empty(len(lams))
    for i, li in enumerate(lams):
        num = np.prod(li - np.asarray(roots))
        den = np.prod([li - lk for k, lk in enumerate(lams) if k != i])
        out[i] = -num / den
    return out


# -- Killing tensor fields -------------------------------------------------

@dataclass(frozen=True)
class KillingTensorField:
    space: PseudoSpace
    components: PolyMat = field(repr=False)
    label: str = ""

    def __call__(self, x):
        return self.components(x)

    def to_json(self):
        return {"space": self.space.to_json(), "label": self.label,
                "monomials": self.components.to_json()}

    def __add__(self, other):
        return KillingTensorField(self.space, self.components + other.components)

    def __mul__(self, c):
        return KillingTensorField(self.space, self.components * float(c), self.label)

    __rmul__ = __mul__


def _cap(space):
    return SPHERE_DEGREE_CAP if space.is_sphere else FLAT_DEGREE_CAP


def kbdt(L):
    sp = L.space
    F = L.field()
    G = metric_field(sp)
    K = (F @ sp.g).trace() * G - F
    return KillingTensorField(sp, K.prune().check_degree(_cap(sp)), "K1")


def benenti_sequence(L):
    sp = L.space
    if sp.n > 6:
        raise SpaceError("dimension above 6 is not supported")
    g = sp.g
    F = L.field()
    G = metric_field(sp)
    out = [KillingTensorField(sp, G, "K0")]
    K = G
    for a in range(1, sp.n):
        KgL = K @ g @ F
        if a == 1:
            # K0 g acts as the identity on tangent vectors; tr(L) keeps the degree low
            K = (F @ g).trace() * G - F
        else:
            K = (KgL @ g).trace() * G * (1.0 / a) - KgL
        K = K.sym().prune().check_degree(_cap(sp))
        out.append(KillingTensorField(sp, K, f"K{a}"))
    return out


# -- residual checks ---------------------------------------------------------

def _covector_projector(space, x):
    if not space.is_sphere:
        return np.eye(space.dim)
    return np.eye(space.dim) - space.kappa * np.outer(space.g @ x, x)


def _sym3(T):
    return (T + T.transpose(1, 2, 0) + T.transpose(2, 0, 1)
            + T.transpose(0, 2, 1) + T.transpose(2, 1, 0) + T.transpose(1, 0, 2)) / 6.0


def _as_field(K):
    if isinstance(K, KillingTensorField):
        return K.space, K.components
    if isinstance(K, ConcircularTensor):
        return K.space, K.field()
    raise TypeError("expected a KillingTensorField or ConcircularTensor")


def killing_residuals(K, points):
    """Per-point max |sym(nabla K)| using the analytic polynomial derivative."""
    sp, F = _as_field(K)
    g = sp.g
    Fc = g @ F @ g
    dF = [f for f in Fc.gradient()]
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals = np.stack([f(pts) for f in dF], axis=1)  # (m, i, j, k)
    out = np.empty(len(pts))
    for a, x in enumerate(pts):
        P = _covector_projector(sp, x)
        T = np.einsum("ai,bj,ck,ijk->abc", P, P, P, vals[a])
        out[a] = np.abs(_sym3(T)).max()
    return out


def verify_killing(K, sample_points, h=None):
    """Max symmetrized covariant derivative.  Polynomial fields are
    differentiated exactly; a callable K (point -> contravariant matrix)
    together with h falls back to 4th-order central differences."""
    if callable(K) and not isinstance(K, (KillingTensorField, ConcircularTensor)):
        raise TypeError("use verify_killing_fd for plain callables")
    return float(killing_residuals(K, sample_points).max())


def _fd_grad(f, x, h):
    # 4th-order central stencil, exact for polynomials of degree <= 4
    d = len(x)
    out = []
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        out.append((-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h))
    return np.stack(out)


def verify_killing_fd(Kfun, space, sample_points, h=1e-4):
    g = space.g
    res = 0.0
    for x in np.atleast_2d(sample_points):
        T = _fd_grad(lambda y: g @ Kfun(y) @ g, np.asarray(x, float), h)
        P = _covector_projector(space, x)
        T = np.einsum("ai,bj,ck,ijk->abc", P, P, P, T)
        res = max(res, float(np.abs(_sym3(T)).max()))
    return res


def concircular_fit(Lfun, space, x, h=1e-4):
    """Fit alpha in nabla_k L_ij = (alpha_i g_jk + alpha_j g_ik)/2; return (alpha, residual)."""
    x = np.asarray(x, dtype=float)
    g = space.g
    d = space.dim
    # the stencil and projection run in extended precision: on a sphere the
    # projector entries grow like |x|^2 and amplify rounding in the differences
    xl = x.astype(np.longdouble)
    T = _fd_grad(lambda y: g @ Lfun(y) @ g, xl, h)  # T[k, i, j]
    P = _covector_projector(space, xl)
    T = np.einsum("ka,ib,jc,abc->kij", P, P, P, T).astype(float)
    gm = g if not space.is_sphere else g - space.kappa * np.outer(g @ x, g @ x)
    # design matrix: column l gives coefficient of alpha_l
    M = np.zeros((d, d, d, d))
    for l in range(d):
        for k in range(d):
            for i in range(d):
                for j in range(d):
                    M[k, i, j, l] = 0.5 * ((i == l) * gm[j, k] + (j == l) * gm[i, k])
    M = M.reshape(-1, d)
    alpha = np.linalg.lstsq(M, T.ravel(), rcond=None)[0]
    r = T.ravel() - M @ alpha
    return alpha, float(np.abs(r).max())


def verify_concircular(L, sample_points, h=1e-4, space=None):
    """Max residual of the concircular equation over the samples (FD path)."""
    if isinstance(L, ConcircularTensor):
        space = L.space
        F = L.field()
        fun = F
    else:
        fun = L
    return max(concircular_fit(fun, space, x, h)[1] for x in np.atleast_2d(sample_points))


def sample_sphere(space, rng, m, box=2.0):
    """Random points on a sphere (rejecting near-null directions)."""
    out = []
    s = space.signs
    while len(out) < m:
        v = rng.uniform(-box, box, space.dim)
        q = np.dot(s * v, v) * space.kappa
        if q > 0.05 * np.dot(v, v):
            out.append(v / np.sqrt(q))
    return np.array(out)
