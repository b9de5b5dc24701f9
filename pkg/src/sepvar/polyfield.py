"""Matrix-valued polynomials in the Cartesian coordinates.

A PolyMat stores {exponent tuple: coefficient array}.  Only the operations
needed for concircular and Killing tensor fields are provided: sums,
products, traces, partial derivatives and vectorized evaluation.
"""

import numpy as np


class DegreeError(ValueError):
    pass


class PolyMat:
    __slots__ = ("nvars", "shape", "terms")
    __array_ufunc__ = None  # let numpy defer to our reflected operators

    def __init__(self, nvars, shape, terms=None):
        self.nvars = nvars
        self.shape = tuple(shape)
        self.terms = {}
        for e, c in (terms or {}).items():
            c = np.asarray(c, dtype=float)
            if c.shape != self.shape:
                raise ValueError("coefficient shape mismatch")
            self.terms[tuple(e)] = c

    @classmethod
    def constant(cls, c, nvars):
        c = np.asarray(c, dtype=float)
        return cls(nvars, c.shape, {(0,) * nvars: c})

    @classmethod
    def coordinate(cls, i, nvars):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, (), {tuple(e): 1.0})

    @classmethod
    def position(cls, nvars):
        """The vector field r = x^i d_i as an (n,) polynomial."""
        terms = {}
        for i in range(nvars):
            e = [0] * nvars
            e[i] = 1
            c = np.zeros(nvars)
            c[i] = 1.0
            terms[tuple(e)] = c
        return cls(nvars, (nvars,), terms)

    def copy(self):
        return PolyMat(self.nvars, self.shape, {e: c.copy() for e, c in self.terms.items()})

    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def prune(self, rel=1e-13):
        scale = max((np.abs(c).max(initial=0.0) for c in self.terms.values()), default=0.0)
        cut = rel * scale
        self.terms = {e: c for e, c in self.terms.items() if np.abs(c).max(initial=0.0) > cut}
        return self

    def _coerce(self, other):
        if isinstance(other, PolyMat):
            return other
        return PolyMat.constant(other, self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        shape = np.broadcast_shapes(self.shape, other.shape)
        out = {}
        for e, c in self.terms.items():
            out[e] = np.broadcast_to(c, shape).copy()
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else np.broadcast_to(c, shape).copy()
        return PolyMat(self.nvars, shape, out)

    __radd__ = __add__

    def __neg__(self):
        return PolyMat(self.nvars, self.shape, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        """Elementwise product (numpy broadcasting on the coefficients)."""
        if not isinstance(other, PolyMat):
            other = np.asarray(other, dtype=float)
            if other.ndim == 0:
                return PolyMat(self.nvars, self.shape, {e: c * other for e, c in self.terms.items()})
            other = PolyMat.constant(other, self.nvars)
        shape = np.broadcast_shapes(self.shape, other.shape)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 * c2
                out[e] = out[e] + v if e in out else v
        return PolyMat(self.nvars, shape, out)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, PolyMat):
            other = np.asarray(other, dtype=float)
            return PolyMat(self.nvars, (self.shape[0],) + other.shape[1:],
                           {e: c @ other for e, c in self.terms.items()})
        out = {}
        shape = None
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 @ c2
                shape = v.shape
                out[e] = out[e] + v if e in out else v
        if shape is None:
            shape = np.empty(self.shape) @ np.empty(other.shape)
            shape = shape.shape
        return PolyMat(self.nvars, shape, out)

    def __rmatmul__(self, other):
        other = np.asarray(other, dtype=float)
        return PolyMat(self.nvars, other.shape[:-1] + self.shape[1:],
                       {e: other @ c for e, c in self.terms.items()})

    def outer(self, other):
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = np.multiply.outer(c1, c2)
                out[e] = out[e] + v if e in out else v
        return PolyMat(self.nvars, self.shape + other.shape, out)

    @property
    def T(self):
        return PolyMat(self.nvars, self.shape[::-1], {e: c.T for e, c in self.terms.items()})

    def trace(self):
        return PolyMat(self.nvars, (), {e: np.trace(c) for e, c in self.terms.items()})

    def sym(self):
        return PolyMat(self.nvars, self.shape, {e: 0.5 * (c + c.T) for e, c in self.terms.items()})

    def diff(self, i):
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k == 0:
                continue
            e2 = list(e)
            e2[i] = k - 1
            e2 = tuple(e2)
            out[e2] = out[e2] + k * c if e2 in out else k * c
        return PolyMat(self.nvars, self.shape, out)

    def gradient(self):
        """List of partial derivatives d/dx^i."""
        return [self.diff(i) for i in range(self.nvars)]

    def __call__(self, x):
        """Evaluate at one point (shape (nvars,)) or many (shape (m, nvars))."""
        x = np.asarray(x)
        # extended precision passes through; everything else evaluates in float64
        x = x.astype(np.longdouble if x.dtype == np.longdouble else float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        out = np.zeros((X.shape[0],) + self.shape, dtype=x.dtype)
        for e, c in self.terms.items():
            mono = np.prod(X ** np.asarray(e), axis=1)
            out += np.multiply.outer(mono, c)
        return out[0] if single else out

    def to_json(self):
        return [{"exponent": list(e), "coefficient": np.asarray(c).tolist()}
                for e, c in sorted(self.terms.items())]

    def check_degree(self, cap):
        d = self.degree
        if d > cap:
            raise DegreeError(f"polynomial degree {d} exceeds cap {cap}")
        return self

    def compose_affine(self, P, q):
        """Substitute y = P x + q; the result lives in len(x) = P.shape[1] variables."""
        P = np.asarray(P, dtype=float)
        q = np.asarray(q, dtype=float)
        nx = P.shape[1]
        ys = []
        for i in range(self.nvars):
            t = {(0,) * nx: q[i]} if q[i] else {}
            for j in range(nx):
                if P[i, j]:
                    e = [0] * nx
                    e[j] = 1
                    t[tuple(e)] = t.get(tuple(e), 0.0) + P[i, j]
            ys.append(PolyMat(nx, (), t))
        powers = {}

        def pw(i, k):
            if (i, k) not in powers:
                powers[(i, k)] = PolyMat.constant(1.0, nx) if k == 0 else pw(i, k - 1) * ys[i]
            return powers[(i, k)]

        out = PolyMat(nx, self.shape, {})
        for e, c in self.terms.items():
            mono = PolyMat.constant(1.0, nx)
            for i, k in enumerate(e):
                if k:
                    mono = mono * pw(i, k)
            out = out + mono * PolyMat.constant(c, nx)
        return out.prune(1e-15)

    def homogeneous_parts(self):
        parts = {}
        for e, c in self.terms.items():
            parts.setdefault(sum(e), {})[e] = c
        return {d: PolyMat(self.nvars, self.shape, t) for d, t in parts.items()}

    def divide_quadratic(self, diag, rel_tol=1e-9):
        """Exact division by sum_i diag[i] x_i^2; raises if the remainder is not ~0."""
        diag = np.asarray(diag, dtype=float)
        k = self.nvars - 1
        rest = {e: c.copy() for e, c in self.terms.items()}
        quot = {}
        scale = max((np.abs(c).max(initial=0.0) for c in self.terms.values()), default=0.0)
        while True:
            cand = [e for e, c in rest.items() if e[k] >= 2 and np.abs(c).max(initial=0.0) > 1e-15 * scale]
            if not cand:
                break
            e = max(cand, key=lambda t: (t[k], t))
            c = rest.pop(e) / diag[k]
            qe = list(e)
            qe[k] -= 2
            qe = tuple(qe)
            quot[qe] = quot[qe] + c if qe in quot else c
            for i in range(self.nvars):
                te = list(qe)
                te[i] += 2
                te = tuple(te)
                if te == e:
                    continue
                v = -diag[i] * c
                rest[te] = rest[te] + v if te in rest else v
        left = max((np.abs(c).max(initial=0.0) for c in rest.values()), default=0.0)
        if left > rel_tol * max(scale, 1e-300):
            raise ValueError(f"polynomial is not divisible (remainder {left:.3g})")
        return PolyMat(self.nvars, self.shape, quot)
