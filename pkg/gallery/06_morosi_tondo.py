"""
A separable potential in Minkowski space
========================================

The Morosi-Tondo potential lives in E^3_1. Its nullspace is two dimensional
and the non-trivial tensor is of null axial type, so the separation goes
through a null direction.
"""
import numpy as np

from sepvar import bekm, hamiltonian_lab as hl
from sepvar.canonical_forms import classify_ct
from sepvar.kbd_solver import kbd_solve
from sepvar.potential_dsl import parse_potential

V = parse_potential("morosi-tondo", None)
print("V =", V, "on", V.space)

box = (np.zeros(3), 1.0)
print("nullspace dim:", kbd_solve(V, V.space, box=box, seed=0).dim)

tree = bekm.bekm_separate(V, V.space, box=box, seed=0)
cls = classify_ct(tree.ct)
print("class:", cls.tag, "index", cls.index)
print("normal form A:\n", cls.normalized_ct.A.round(6))
print("normal form w:", cls.normalized_ct.w.round(6))

Fs = hl.first_integrals(bekm.ks_space(tree), V)
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(20):
    z = hl.PhasePoint(rng.uniform(-1, 1, 3), rng.normal(size=3))
    worst = max(worst, max(abs(hl.poisson_bracket(Fs[i], Fs[j], z)) for i in range(3) for j in range(i + 1, 3)))
print("largest Poisson bracket over 20 points:", worst)
