"""
Elliptic coordinates from eigenvalues
=====================================

The eigenvalues of the central tensor L = diag(l1, l2) + x x^T are the
elliptic coordinates of the point. They interlace with l1, l2 and give back
x^2, y^2 in closed form. The Jacobi functions parametrise the same curves.
"""
import numpy as np

from sepvar.concircular import ConcircularTensor, central_inverse, eigenfunctions
from sepvar.elliptic import complete_elliptic_K, jacobi_elliptic
from sepvar.pseudo_space import E

l1, l2 = 0.7, 2.3
L = ConcircularTensor(E(2), np.diag([l1, l2]), np.zeros(2), 1.0)

for x, y in [(0.5, 1.0), (-1.2, 0.3), (2.0, -2.0)]:
    u = eigenfunctions(L, [x, y]).values
    back = central_inverse([l1, l2], u)
    print(f"({x:5.2f},{y:5.2f})  u = {u.round(4)}  l1<u1<l2<u2: {l1 < u[0] < l2 < u[1]}"
          f"  recovered x^2, y^2 = {np.round(back, 12)}")

# Jacobi elliptic functions by the AGM
a = 0.6
K = complete_elliptic_K(a)
J = jacobi_elliptic(np.linspace(0, K, 5), a)
print("K(0.6) =", K)
print("sn:", J.sn.round(6))
print("sn^2 + cn^2 - 1:", np.abs(J.sn ** 2 + J.cn ** 2 - 1).max())
