"""
Hiding a bit among five receivers
=================================

A sender qubit S is entangled with receivers A, B (one group) and C, D, E
(another group). Before S measures, the receivers hold the same state
whatever the secret is.
"""

import numpy as np

from qdh.fiveparty import five_party_scheme
from qdh.linalg import hermitian_eig
from qdh.protocol import ensemble_state, verify_hiding
from qdh.states import reduced_state

scheme = five_party_scheme()
print("layout:", scheme.layout.labels, "dims", scheme.layout.dims)
print("candidates per secret:", {b: len(c) for b, c in scheme.candidates.items()})

# one candidate: each sender outcome t pairs group labels that add up to b
cand = scheme.candidates[0][0]
for t, labels in enumerate(cand.labels):
    print(f"  secret 0, t={t}: group labels {labels}")

# the receivers' view, averaged over candidates
rho0 = ensemble_state(scheme, 0)
rho1 = ensemble_state(scheme, 1)
print("max |rho0 - rho1| entry:", np.max(np.abs(rho0.matrix - rho1.matrix)))
print("hiding report:", verify_hiding(scheme, 1e-12))

# the spectrum is flat on a 16-dim support
vals, _ = hermitian_eig(rho0.matrix)
print("distinct eigenvalues:", sorted({float(v) for v in np.round(vals, 12)}), "counts", np.unique(np.round(vals, 12), return_counts=True)[1])

# each group alone sees a secret-independent mixture too
for group in scheme.partition.groups:
    g0 = reduced_state(rho0, group).matrix
    g1 = reduced_state(rho1, group).matrix
    print(f"group {''.join(group)}: max difference {np.max(np.abs(g0 - g1)):.1e}")

# drop one family of candidates and the balance breaks
broken = scheme.without_family(0, 1)
print("without family 1 of secret 0:", verify_hiding(broken, 1e-12).max_pairwise_trace_distance)
