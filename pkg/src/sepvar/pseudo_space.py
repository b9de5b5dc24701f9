"""Flat pseudo-Euclidean spaces E^n_nu, their unit spheres, and symmetric 2-tensors.

Conventions: the metric is diag(-1,...,-1,+1,...,+1) with the timelike axes
first.  A sphere E^n_nu(kappa) is stored extrinsically: points are ambient
vectors p of the flat space E^{n+1}_nu with <p,p> = 1/kappa.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

COVARIANT = "covariant"
CONTRAVARIANT = "contravariant"
ENDOMORPHISM = "endomorphism"
_VARIANCES = (COVARIANT, CONTRAVARIANT, ENDOMORPHISM)


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class PseudoSpace:
    """E^n_nu (kappa is None) or the sphere E^n_nu(kappa) sitting in E^{n+1}_nu.

    ``n`` is always the intrinsic dimension; ``nu`` is the ambient index.
    """

    n: int
    nu: int = 0
    kappa: Optional[float] = None

    def __post_init__(self):
        if self.n < 1:
            raise SpaceError("dimension must be >= 1")
        if not 0 <= self.nu <= self.dim:
            raise SpaceError(f"index {self.nu} out of range for ambient dimension {self.dim}")
        if self.kappa is not None and self.kappa == 0:
            raise SpaceError("sphere curvature must be nonzero")

    @property
    def is_sphere(self):
        return self.kappa is not None

    @property
    def dim(self):
        """Number of Cartesian (ambient) components of a point."""
        return self.n + 1 if self.is_sphere else self.n

    @property
    def signs(self):
        return np.array([-1.0] * self.nu + [1.0] * (self.dim - self.nu))

    @property
    def g(self):
        return np.diag(self.signs)

    @property
    def ginv(self):
        # diagonal +-1, so the inverse is itself
        return np.diag(self.signs)

    def ambient(self):
        return PseudoSpace(self.dim, self.nu) if self.is_sphere else self

    @property
    def name(self):
        if self.is_sphere:
            if self.dim == 3 and self.nu == 1 and self.kappa == 1:
                return "dS2"
            if self.dim == 3 and self.nu == 2 and self.kappa == -1:
                return "AdS2"
            if self.dim == 3 and self.nu == 0 and self.kappa == 1:
                return "S2"
            return f"E{self.dim}_{self.nu}({self.kappa:g})"
        return f"E{self.n}" if self.nu == 0 else f"E{self.n}_{self.nu}"

    def check_point(self, p, tol=1e-8):
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.dim:
            raise SpaceError(f"point has {p.shape[-1]} components, space needs {self.dim}")
        if self.is_sphere:
            q = np.einsum("...i,i,...i->...", p, self.signs, p)
            bad = np.abs(q * self.kappa - 1.0) > tol * np.maximum(1.0, np.abs(q * self.kappa))
            if np.any(bad):
                raise SpaceError("point is not on the sphere <p,p> = 1/kappa")
        return p

    def to_json(self):
        d = {"n": self.n, "nu": self.nu}
        if self.is_sphere:
            d["kappa"] = self.kappa
        return d

    @classmethod
    def from_json(cls, d):
        return cls(d["n"], d.get("nu", 0), d.get("kappa"))


def E(n, nu=0):
    return PseudoSpace(n, nu)


def sphere(n, nu=0, kappa=1.0):
    """Unit sphere of intrinsic dimension n in E^{n+1}_nu."""
    return PseudoSpace(n, nu, kappa)


DS2 = PseudoSpace(2, 1, 1.0)
ADS2 = PseudoSpace(2, 2, -1.0)

_NAMED = {
    "E2": PseudoSpace(2, 0), "E3": PseudoSpace(3, 0), "E2_1": PseudoSpace(2, 1),
    "E3_1": PseudoSpace(3, 1), "dS2": DS2, "AdS2": ADS2, "S2": PseudoSpace(2, 0, 1.0),
}


def parse_space(spec):
    """Parse names like E3, E2_1, E4_2, dS2, AdS2, S2."""
    s = spec.strip()
    if s in _NAMED:
        return _NAMED[s]
    if s.startswith("E"):
        body = s[1:]
        try:
            if "_" in body:
                n, nu = body.split("_")
                return PseudoSpace(int(n), int(nu))
            return PseudoSpace(int(body), 0)
        except ValueError:
            pass
    raise SpaceError(f"unknown space '{spec}'")


def scalar_product(x, y, space):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != space.dim or y.shape[-1] != space.dim:
        raise SpaceError("dimension mismatch")
    return np.einsum("...i,i,...i->...", x, space.signs, y)


def sym_product(x, y):
    """(x . y)_ij = (x_i y_j + x_j y_i)/2, contravariant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise SpaceError("dimension mismatch")
    return SymTensor2(0.5 * (np.outer(x, y) + np.outer(y, x)), CONTRAVARIANT)


def lightlike_coords(point, space=None):
    """(zeta, eta) = ((t - x)/sqrt2, (t + x)/sqrt2) from the (t, x) block."""
    p = np.asarray(point, dtype=float)
    if space is not None and (space.is_sphere or space.nu < 1 or space.n < 2):
        raise SpaceError("lightlike coordinates need a flat space with a timelike axis")
    t, x = p[..., 0], p[..., 1]
    return (t - x) / np.sqrt(2.0), (t + x) / np.sqrt(2.0)


@dataclass(frozen=True)
class SymTensor2:
    """A 2-tensor given by its component matrix and a variance tag."""

    components: np.ndarray = field(repr=False)
    variance: str = CONTRAVARIANT

    def __post_init__(self):
        if self.variance not in _VARIANCES:
            raise ValueError(f"bad variance {self.variance}")
        c = np.array(self.components, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "components", c)

    def is_symmetric(self, space=None, tol=1e-10):
        c = self.components
        scale = max(1.0, np.abs(c).max(initial=0.0))
        if self.variance == ENDOMORPHISM:
            gc = space.g @ c
            return np.abs(gc - gc.T).max(initial=0.0) <= tol * scale
        return np.abs(c - c.T).max(initial=0.0) <= tol * scale

    def to_json(self):
        return {"variance": self.variance, "components": self.components.tolist()}

    @classmethod
    def from_json(cls, d):
        return cls(np.array(d["components"], dtype=float), d["variance"])


def raise_lower(T, target, space):
    """Move indices of T with the flat (ambient) metric."""
    if target not in _VARIANCES:
        raise ValueError(f"bad variance {target}")
    g = space.g
    c = T.components
    # go through the contravariant form
    if T.variance == COVARIANT:
        con = g @ c @ g
    elif T.variance == ENDOMORPHISM:
        con = c @ g
    else:
        con = c
    if target == CONTRAVARIANT:
        out = con
    elif target == COVARIANT:
        out = g @ con @ g
    else:
        out = con @ g
    return SymTensor2(out, target)


def vec_to_json(v):
    return [float(a) for a in np.asarray(v, dtype=float)]
