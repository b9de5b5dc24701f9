"""Shared oracles for the test modules."""

import numpy as np

from sepvar.canonical_forms import (canonical_pair, expected_multiset, metric_jordan_form,
                                    random_block_spec, random_pseudo_orthogonal, to_standard)
from sepvar.pseudo_space import E


def mjf_trial(rng, n):
    """Build a known block spec, hide it under a random isometry, recover it."""
    blocks = random_block_spec(rng, n)
    T, g = to_standard(*canonical_pair(blocks))
    nu = int(np.sum(np.diag(g) < 0))
    Q = random_pseudo_orthogonal(g, rng)
    T2 = np.linalg.solve(Q, T @ Q)
    got = metric_jordan_form(T2, E(n, nu)).multiset()
    return got == expected_multiset(blocks), blocks, got


def principal_angles(A, B):
    from scipy.linalg import subspace_angles
    return subspace_angles(np.asarray(A), np.asarray(B))


def ct_vector(L):
    """Parameter vector of a flat CT (A upper triangle, w, m) used for subspace comparisons."""
    iu = np.triu_indices(L.A.shape[0])
    return np.concatenate([L.A[iu], L.w, [L.m]])
