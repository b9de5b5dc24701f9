"""
Flat and curved pseudo-Euclidean spaces
=======================================

Minkowski plane, de Sitter and anti de Sitter as quadrics, and the tensor
bookkeeping used everywhere else.
"""
import numpy as np

from sepvar.pseudo_space import (DS2, ADS2, PseudoSpace, lightlike_coords, raise_lower,
                                 scalar_product, sym_product)

M = PseudoSpace(2, 1)         # E^2_1, metric diag(-1, 1)
print(M, "metric", np.diag(M.g))

e_t, e_x = np.eye(2)
print("<e_t, e_t> =", scalar_product(e_t, e_t, M))
print("<e_t + e_x, e_t + e_x> =", scalar_product(e_t + e_x, e_t + e_x, M), "(null)")

# lightlike coordinates of a point
print("(zeta, eta) of (2, 1):", lightlike_coords([2.0, 1.0], M))

# the symmetric product of two null vectors, lowered with g
S = sym_product(e_t + e_x, e_t - e_x)
print("null ⊙ null:\n", S.components)
print("lowered:\n", raise_lower(S, "covariant", M).components)

# spheres are stored by their ambient coordinates
for sp in (DS2, ADS2):
    print(sp, "ambient dim", sp.dim, "intrinsic dim", sp.n)
p = np.array([np.sinh(0.3), np.cosh(0.3), 0.0])
DS2.check_point(p)
print("on dS2:", p, "<p,p> =", scalar_product(p, p, DS2))
