"""
Canonical form of a concircular tensor
======================================

A random isometry hides the structure of L = A + w x^T + x w^T + m x x^T.
classify_ct recovers the class, the normal form and the Jordan data.
"""
import numpy as np

from sepvar.canonical_forms import classify_ct, random_pseudo_orthogonal
from sepvar.concircular import ConcircularTensor, isometry
from sepvar.pseudo_space import PseudoSpace

rng = np.random.default_rng(1)
sp = PseudoSpace(3, 1)

examples = {
    "central": ConcircularTensor(sp, np.diag([0.5, 1.0, 2.0]), np.zeros(3), 1.0),
    "non-null axial": ConcircularTensor(sp, np.diag([0.0, 1.0, 3.0]), np.array([0.0, 0.0, 1.0]), 0.0),
    # w null, and A g w not orthogonal to w: a Jordan chain of length 2
    "null axial": ConcircularTensor(sp, np.outer([-1.0, 1.0, 0.0], [-1.0, 1.0, 0.0]) / 2,
                                    np.array([1.0, 1.0, 0.0]) / np.sqrt(2), 0.0),
}

for label, L in examples.items():
    Q = random_pseudo_orthogonal(sp.g, rng)
    hidden = isometry(L, Q, rng.normal(size=3))
    cls = classify_ct(hidden)
    print(f"{label:15s} -> {cls.tag} index={cls.index} sign={cls.sign}")
    if cls.blocks is not None:
        print("   Jordan blocks:", cls.blocks.multiset())
