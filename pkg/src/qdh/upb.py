"""Exact unextendibility check for sets of product states.

A set of product states ``{⊗_j v_kj}`` admits an orthogonal product state
iff the members can be distributed over the parties so that, for every
party ``j``, the local vectors of the members sent to ``j`` span at most
``d_j - 1`` dimensions. The check enumerates all such assignments.
"""

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .linalg import kron_all

ORTHO_TOL = 1e-10
PARALLEL_TOL = 1e-10
ENUMERATION_CAP = 10**7


class CapacityError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProductStateSet:
    local_dims: tuple
    states: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.local_dims)
        states = tuple(tuple(np.asarray(v, dtype=complex) for v in s) for s in self.states)
        for k, s in enumerate(states):
            if len(s) != len(dims):
                raise ValueError(f"member {k} has {len(s)} factors, expected {len(dims)}")
            for j, v in enumerate(s):
                if v.shape != (dims[j],):
                    raise ValueError(f"member {k} factor {j} has shape {v.shape}, expected ({dims[j]},)")
                if abs(np.linalg.norm(v) - 1) > 1e-12:
                    raise ValueError(f"member {k} factor {j} is not normalized")
        object.__setattr__(self, "local_dims", dims)
        object.__setattr__(self, "states", states)

    @property
    def n_parties(self):
        return len(self.local_dims)

    def __len__(self):
        return len(self.states)

    def vector(self, k):
        return kron_all(*self.states[k])

    def without(self, k):
        return ProductStateSet(self.local_dims, self.states[:k] + self.states[k + 1 :])


class OrthogonalityResult(NamedTuple):
    orthogonal: bool
    witness: Optional[tuple]


class UnextendibilityResult(NamedTuple):
    unextendible: bool
    witness: Optional[tuple]
    assignment: Optional[tuple]
    assignments_checked: int


def check_orthogonality(pset, tol=ORTHO_TOL):
    """All pairwise global overlaps vanish; otherwise return the first offending pair."""
    for a, b in itertools.combinations(range(len(pset)), 2):
        overlap = np.prod([np.vdot(u, v) for u, v in zip(pset.states[a], pset.states[b])])
        if abs(overlap) > tol:
            return OrthogonalityResult(False, (a, b))
    return OrthogonalityResult(True, None)


def local_rank(vectors, tol=PARALLEL_TOL):
    """Span dimension; two unit vectors count as parallel when ``|<u|v>| >= 1 - tol``."""
    if not vectors:
        return 0
    s = np.linalg.svd(np.array(vectors), compute_uv=False)
    return int(np.sum(s**2 > tol))


def _orthogonal_vector(vectors, dim):
    if not vectors:
        e = np.zeros(dim, dtype=complex)
        e[0] = 1
        return e
    a = np.conj(np.array(vectors))
    _, _, vh = np.linalg.svd(a, full_matrices=True)
    w = vh[-1].conj()
    return w / np.linalg.norm(w)


def check_unextendible(pset, cap=ENUMERATION_CAP, require_orthogonal=True):
    """Decide unextendibility by enumerating member-to-party assignments.

    Returns the verdict, and for extendible sets a product witness
    orthogonal to every member together with the assignment that built it.
    """
    if require_orthogonal and not check_orthogonality(pset).orthogonal:
        raise ValueError("set is not mutually orthogonal")
    n, k = pset.n_parties, len(pset)
    total = n**k
    if total > cap:
        raise CapacityError(f"{total} assignments exceed the enumeration cap {cap}")
    checked = 0
    for assignment in itertools.product(range(n), repeat=k):
        checked += 1
        groups = [[pset.states[m][j] for m in range(k) if assignment[m] == j] for j in range(n)]
        if all(local_rank(groups[j]) <= pset.local_dims[j] - 1 for j in range(n)):
            witness = tuple(_orthogonal_vector(groups[j], pset.local_dims[j]) for j in range(n))
            return UnextendibilityResult(False, witness, assignment, checked)
    return UnextendibilityResult(True, None, None, checked)


def witness_overlaps(pset, witness):
    """``|<member|witness>|`` for every member."""
    w = kron_all(*witness)
    return np.array([abs(np.vdot(pset.vector(m), w)) for m in range(len(pset))])
