"""
How much can the receivers learn?
=================================

Any joint measurement before the reveal gives a guessing channel with
identical rows. For a biased binary channel the mutual information stays
below delta * H, and XOR over n blocks shrinks delta to delta**n.
"""

import numpy as np

from qdh.fiveparty import five_party_scheme
from qdh.measurement import make_rng, random_povm
from qdh.protocol import ensemble_state
from qdh.security import (
    AttackModel,
    BinaryChannel,
    divincenzo_bound,
    guessing_channel,
    helstrom,
    xor_amplify,
    xor_bias_oracle,
)

scheme = five_party_scheme()
rng = make_rng(11)
povm = random_povm(scheme.receiver_layout.total_dim, 4, rng)
ch = guessing_channel(scheme, AttackModel("global_povm", {"povm": povm}), exact=True)
print("channel rows:\n", np.round(ch.matrix, 6))
print("mutual information:", ch.mutual_information())
print("Helstrom:", helstrom(ensemble_state(scheme, 0), ensemble_state(scheme, 1)))

# after the reveal the authorized groups read b exactly
auth = AttackModel("per_group_quantum_with_classical_across", {"authorized": True}, stage="reveal")
print("authorized after reveal:", guessing_channel(scheme, auth, exact=True).mutual_information(), "bits")

# the bias bound on a few channels
for p00, p01 in [(0.75, 0.35), (0.9, 0.2), (0.3, 0.6), (0.5, 0.5)]:
    rep = divincenzo_bound(BinaryChannel(p00, p01))
    print(f"({p00}, {p01}): delta={rep.delta:.2f} I={rep.mutual_info_bits:.4f} bound={rep.bound_delta_times_H:.4f}")

# amplification over parallel blocks
delta = 0.4
for n in (1, 2, 5, 10, 20):
    print(f"n={n:2d}: delta^n={xor_amplify(delta, n):.3e} oracle={xor_bias_oracle(delta, n):.3e}")
