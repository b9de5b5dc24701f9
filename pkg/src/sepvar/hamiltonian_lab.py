"""Quadratic first integrals, Poisson brackets and a small RK4 integrator.

F(q, p) = 1/2 K^{ij}(q) p_i p_j + U(q) with dU = K dV (index lowered).
The p-derivatives are exact, q-derivatives of K come from the polynomial
field and dU is evaluated directly as the one-form K dV, so brackets never
need U itself.  U values (for conservation checks) are line integrals.
"""

from dataclasses import dataclass, field

import numpy as np

from .concircular import KillingTensorField, metric_field
from .kbd_solver import dkdv_residual, one_form


class TrajectoryError(ValueError):
    pass


@dataclass
class PhasePoint:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have the same dimension")


@dataclass
class FirstIntegral:
    K: KillingTensorField
    V: object
    is_hamiltonian: bool = False
    name: str = ""
    _dK: list = field(default=None, repr=False)

    @property
    def space(self):
        return self.K.space

    def dK(self):
        if self._dK is None:
            self._dK = self.K.components.gradient()
        return self._dK

    def dU(self, q):
        if self.is_hamiltonian:
            return np.asarray(self.V.grad(q), dtype=float)
        return one_form(self.K, self.V, q)[0]

    def U_increment(self, a, b, n_nodes=8):
        """U(b) - U(a) by Gauss-Legendre on the exact one-form."""
        if self.is_hamiltonian:
            return float(self.V.value(b) - self.V.value(a))
        a, b = np.asarray(a, float), np.asarray(b, float)
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        s = 0.5 * (x + 1.0)
        X = a + np.outer(s, b - a)
        th = one_form(self.K, self.V, X)
        return float(0.5 * np.sum(w * (th @ (b - a))))

    def kinetic(self, q, p):
        return 0.5 * p @ self.K(q) @ p

    def value(self, q, p, base=None, U_base=0.0):
        """F(q, p) with the gauge U(base) = U_base (base defaults to q: U = 0 there)."""
        q, p = np.asarray(q, float), np.asarray(p, float)
        if self.is_hamiltonian:
            return float(self.kinetic(q, p) + self.V.value(q))
        U = U_base if base is None else U_base + self.U_increment(base, q)
        return float(self.kinetic(q, p) + U)

    def grad_q(self, q, p):
        q, p = np.asarray(q, float), np.asarray(p, float)
        if self.is_hamiltonian and not self.space.is_sphere:
            return np.asarray(self.V.grad(q), dtype=float)
        dK = np.stack([d(q) for d in self.dK()])
        return 0.5 * np.einsum("i,kij,j->k", p, dK, p) + self.dU(q)

    def grad_p(self, q, p):
        if self.is_hamiltonian and not self.space.is_sphere:
            return self.space.ginv @ np.asarray(p, float)
        return self.K(np.asarray(q, float)) @ np.asarray(p, float)


def hamiltonian(V, space):
    """H = 1/2 g^{ij} p_i p_j + V."""
    return FirstIntegral(KillingTensorField(space, metric_field(space), "G"), V, True, "H")


def first_integrals(ks, V):
    out = []
    for i, K in enumerate(ks):
        if i == 0:
            out.append(FirstIntegral(K, V, True, "H"))
        else:
            out.append(FirstIntegral(K, V, False, K.label or f"F{i}"))
    return out


def poisson_bracket(F, G, z, h=1e-5):
    """{F, G} at the phase point z.  h is used only for non-polynomial K."""
    q, p = z.q, z.p
    if hasattr(F.K.components, "gradient") and hasattr(G.K.components, "gradient"):
        Fq, Gq = F.grad_q(q, p), G.grad_q(q, p)
    else:
        Fq, Gq = _fd_q(F, q, p, h), _fd_q(G, q, p, h)
    return float(Fq @ G.grad_p(q, p) - F.grad_p(q, p) @ Gq)


def _fd_q(F, q, p, h):
    out = np.empty(len(q))
    for i in range(len(q)):
        e = np.zeros(len(q))
        e[i] = h
        out[i] = (F.kinetic(q + e, p) - F.kinetic(q - e, p)) / (2 * h)
    return out + F.dU(q)


def independence_sigma(Fs, z):
    """Smallest singular value of the row-normalized differentials dF_a at z."""
    rows = []
    for F in Fs:
        r = np.concatenate([F.grad_q(z.q, z.p), F.grad_p(z.q, z.p)])
        nr = np.linalg.norm(r)
        rows.append(r / nr if nr > 0 else r)
    return float(np.linalg.svd(np.array(rows), compute_uv=False).min())


@dataclass
class Trajectory:
    t: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    truncated: bool = False
    reason: str = ""

    def to_csv(self):
        d = self.Q.shape[1]
        head = ["t"] + [f"q{i + 1}" for i in range(d)] + [f"p{i + 1}" for i in range(d)]
        lines = [",".join(head)]
        for t, q, p in zip(self.t, self.Q, self.P):
            lines.append(",".join(repr(float(v)) for v in (t, *q, *p)))
        return "\n".join(lines) + "\n"


def integrate_trajectory(H, z0, T, dt, record_every=10, escape=1e4):
    """Fixed-step RK4 for Hamilton's equations; stops early (flagged) at a singularity."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if H.space.is_sphere:
        raise TrajectoryError("trajectories are integrated on flat spaces only")
    q, p = z0.q.copy(), z0.p.copy()

    def rhs(q, p):
        return H.grad_p(q, p), -H.grad_q(q, p)

    n = int(round(T / dt))
    ts, Qs, Ps = [0.0], [q.copy()], [p.copy()]
    with np.errstate(all="raise"):
        for k in range(1, n + 1):
            try:
                k1 = rhs(q, p)
                k2 = rhs(q + 0.5 * dt * k1[0], p + 0.5 * dt * k1[1])
                k3 = rhs(q + 0.5 * dt * k2[0], p + 0.5 * dt * k2[1])
                k4 = rhs(q + dt * k3[0], p + dt * k3[1])
                q = q + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
                p = p + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            except (FloatingPointError, ZeroDivisionError):
                return Trajectory(np.array(ts), np.array(Qs), np.array(Ps), True,
                                  f"singularity near t={k * dt:.6g}")
            if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
                return Trajectory(np.array(ts), np.array(Qs), np.array(Ps), True,
                                  f"non-finite state at t={k * dt:.6g}")
            if max(np.abs(q).max(), np.abs(p).max()) > escape:
                return Trajectory(np.array(ts), np.array(Qs), np.array(Ps), True,
                                  f"escaped beyond {escape:g} at t={k * dt:.6g}")
            if k % record_every == 0 or k == n:
                ts.append(k * dt)
                Qs.append(q.copy())
                Ps.append(p.copy())
    return Trajectory(np.array(ts), np.array(Qs), np.array(Ps))


def integral_values(F, traj):
    """F along the recorded trajectory, gauge U(first point) = 0."""
    out = np.empty(len(traj.t))
    U = 0.0
    for i, (q, p) in enumerate(zip(traj.Q, traj.P)):
        if i:
            U += F.U_increment(traj.Q[i - 1], q)
        out[i] = F.kinetic(q, p) + (F.V.value(q) if F.is_hamiltonian else U)
    return out


def conservation_drift(F, traj):
    """max |F(t) - F(0)| / max(|F(0)|, 1)."""
    v = integral_values(F, traj)
    return float(np.abs(v - v[0]).max() / max(abs(v[0]), 1.0))


# -- separation witness -----------------------------------------------------

def _offdiag_rel(M):
    d = np.sqrt(np.abs(np.diag(M)))
    S = np.outer(d, d)
    S[S == 0] = 1.0
    R = np.abs(M) / S
    np.fill_diagonal(R, 0.0)
    return float(R.max())


def assembled_chkt(ks, seed=0):
    """A generic member of the Killing-Stackel space (seeded coefficients)."""
    rng = np.random.default_rng([seed, 11])
    c = rng.uniform(1.0, 2.0, len(ks)) * rng.choice([-1.0, 1.0], len(ks))
    K = ks[0] * c[0]
    for ci, Ki in zip(c[1:], ks[1:]):
        K = K + Ki * ci
    return KillingTensorField(ks[0].space, K.components, "ChKT")


def _frame_defined(frame, x):
    from .concircular import NotOrthogonal
    try:
        F = frame(x)
    except NotOrthogonal:
        return False
    return bool(np.all(np.isfinite(F)))


def separation_witness(tree, V, points=None, frame=None, seed=0, n=20, tol=1e-6):
    """Metric and assembled ChKT diagonal in the web frame, and d(K dV) = 0.

    frame(x) -> columns of coordinate directions; defaults to the tree's own web.
    """
    from . import bekm
    if not tree.resolved:
        raise bekm.UnresolvedTree("witness needs a resolved tree")
    sp = tree.space
    if frame is None:
        frame = lambda x: bekm.tree_frame(tree, x)  # noqa: E731
    if points is None:
        rng = np.random.default_rng([seed, 5])
        if sp.is_sphere:
            from .concircular import sample_sphere
            points = sample_sphere(sp, rng, 4 * n)
        else:
            c, hw = tree.box
            points = c + rng.uniform(-hw, hw, size=(4 * n, sp.dim))
        with np.errstate(all="ignore"):
            points = points[np.isfinite(V.value(points))]
        points = [x for x in points if _frame_defined(frame, x)][:n]
        if len(points) < max(1, n // 2):
            return {"ok": False, "metric_offdiag": np.inf, "chkt_offdiag": np.inf, "min_eigen_gap": 0.0,
                    "dkdv": np.inf, "n": len(points), "reason": "web frame undefined at most sample points"}
    ks = bekm.ks_space(tree)
    K = assembled_chkt(ks, seed)
    g = sp.g
    metric_off, k_off, gap = 0.0, 0.0, np.inf
    for x in np.atleast_2d(points):
        F = frame(x)
        M = F.T @ g @ F
        Kc = F.T @ g @ K(x) @ g @ F
        metric_off = max(metric_off, _offdiag_rel(M))
        k_off = max(k_off, _offdiag_rel(Kc) if np.abs(np.diag(Kc)).max() > 0 else np.abs(Kc).max())
        lam = np.sort(np.diag(Kc) / np.diag(M))
        if len(lam) > 1:
            gap = min(gap, float(np.diff(lam).min() / (1.0 + np.abs(lam).max())))
    dk = 0.0
    for x in np.atleast_2d(points):
        scale = np.abs(K(x)).max() * (np.abs(V.grad(x)).max() + np.abs(V.hessian(x)).max()) + 1e-300
        dk = max(dk, dkdv_residual(K, V, x) / scale)
    ok = metric_off < tol and k_off < tol and gap > 1e-8 and dk < tol
    return {"ok": bool(ok), "metric_offdiag": metric_off, "chkt_offdiag": k_off,
            "min_eigen_gap": float(gap), "dkdv": float(dk), "n": int(len(np.atleast_2d(points)))}
