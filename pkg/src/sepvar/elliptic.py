"""Jacobi elliptic functions with modulus a (parameter m = a^2).

sn, cn, dn come from the descending Landen / AGM scheme; K(a) from the AGM.
Quotients such as sc = sn/cn raise PoleError where the denominator vanishes.
"""

import numpy as np

_EPS = 1e-16
POLE_TOL = 1e-14


class PoleError(ArithmeticError):
    """A Jacobi quotient was evaluated at one of its poles."""


def _check_modulus(a):
    a = float(a)
    if not 0.0 <= a < 1.0:
        raise ValueError(f"modulus must lie in [0, 1), got {a}")
    return a


def _agm_sequence(a):
    m = a * a
    an, bn, cn = 1.0, np.sqrt(1.0 - m), a
    seq = [(an, cn)]
    while abs(cn) > _EPS * an and len(seq) < 64:
        an, bn, cn = 0.5 * (an + bn), np.sqrt(an * bn), 0.5 * (an - bn)
        seq.append((an, cn))
    return seq


def complete_elliptic_K(a):
    """Quarter period K(a) = pi / (2 AGM(1, sqrt(1 - a^2)))."""
    a = _check_modulus(a)
    an = _agm_sequence(a)[-1][0]
    return np.pi / (2.0 * an)


def _amplitude(u, a):
    seq = _agm_sequence(a)
    N = len(seq) - 1
    phi = (2.0 ** N) * seq[-1][0] * u
    for n in range(N, 0, -1):
        an, cn = seq[n]
        phi = 0.5 * (phi + np.arcsin(np.clip(cn / an * np.sin(phi), -1.0, 1.0)))
    return phi


class JacobiValues:
    """sn, cn, dn at u together with the nine standard quotients."""

    __slots__ = ("sn", "cn", "dn")

    def __init__(self, sn, cn, dn):
        self.sn, self.cn, self.dn = sn, cn, dn

    def __iter__(self):
        return iter((self.sn, self.cn, self.dn))

    def _q(self, num, den, name):
        den = np.asarray(den)
        if np.any(np.abs(den) < POLE_TOL):
            raise PoleError(f"{name} has a pole here")
        return num / den

    @property
    def sc(self):
        return self._q(self.sn, self.cn, "sc")

    @property
    def nc(self):
        return self._q(1.0, self.cn, "nc")

    @property
    def dc(self):
        return self._q(self.dn, self.cn, "dc")

    @property
    def sd(self):
        return self._q(self.sn, self.dn, "sd")

    @property
    def cd(self):
        return self._q(self.cn, self.dn, "cd")

    @property
    def nd(self):
        return self._q(1.0, self.dn, "nd")

    @property
    def ns(self):
        return self._q(1.0, self.sn, "ns")

    @property
    def cs(self):
        return self._q(self.cn, self.sn, "cs")

    @property
    def ds(self):
        return self._q(self.dn, self.sn, "ds")

    def get(self, name):
        if name in ("sn", "cn", "dn"):
            return getattr(self, name)
        if name not in ("sc", "nc", "dc", "sd", "cd", "nd", "ns", "cs", "ds"):
            raise KeyError(name)
        return getattr(self, name)


def jacobi_elliptic(u, a):
    """(sn, cn, dn)(u; a) as a JacobiValues; u may be an array."""
    a = _check_modulus(a)
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("argument must be finite")
    if a == 0.0:
        return JacobiValues(np.sin(u), np.cos(u), np.ones_like(u))
    phi = _amplitude(u, a)
    sn, cn = np.sin(phi), np.cos(phi)
    # dn > 0 for a < 1, so the identity dn^2 = 1 - a^2 sn^2 fixes it
    dn = np.sqrt(np.maximum(1.0 - a * a * sn * sn, 0.0))
    return JacobiValues(sn, cn, dn)


def jacobi(name, u, a):
    """Single function by name, e.g. jacobi('sc', u, 0.5)."""
    return jacobi_elliptic(u, a).get(name)
