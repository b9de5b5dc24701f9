"""
Writing potentials
==================

Potentials are small expressions over q1..qn (or t, x, y, mu, nu in
Minkowski space). They are differentiated symbolically.
"""
import numpy as np

from sepvar.potential_dsl import fd_check, parse_potential, to_string
from sepvar.pseudo_space import E, parse_space

V = parse_potential("1/(x^2 + y^2) + exp(-y) * sin(x)", E(2))
X = np.array([[0.5, 1.0], [1.5, -0.2]])
print("V   :", V.value(X))
print("grad:", V.grad(X))
print("dV/dx:", to_string(V.grad_ast[0]))
print("gradient vs finite differences:", fd_check(V, X))

W = parse_potential("nu^-2 + mu", parse_space("E2_1"))
print(W, W.value(np.array([[0.3, 1.0]])))
