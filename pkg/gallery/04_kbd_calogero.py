"""
KBD nullspace of the Calogero-Moser potential
=============================================

Every concircular tensor L whose Killing tensor K satisfies d(K dV) = 0 is a
candidate for separation. For the three-particle Calogero-Moser potential the
solution space is four dimensional and contains the metric.
"""
import numpy as np

from sepvar.kbd_solver import dkdv_residual, kbd_solve
from sepvar.potential_dsl import parse_potential

V = parse_potential("calogero-moser", None)
print("V =", V)

box = (np.array([0.0, 2.0, 4.0]), 0.5)   # keep away from the collision planes
sol = kbd_solve(V, V.space, box=box, seed=0)
print("nullspace dim:", sol.dim)
print("singular values (tail):", np.asarray(sol.singular_values)[-6:])

X = box[0] + np.random.default_rng(2).uniform(-0.5, 0.5, size=(50, 3))
for i, L in enumerate(sol.basis):
    print(f"basis {i}: m={L.m:+.3f} |w|={np.linalg.norm(L.w):.3f}  d(K dV) residual {dkdv_residual(L, V, X):.1e}")
