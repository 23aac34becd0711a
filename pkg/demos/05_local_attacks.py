"""
Attacking each subprotocol with one-way local measurements
==========================================================

Each party of a group measures its qubit in a basis that may depend on
what earlier parties saw, and the group guesses the likelier class. The
optimizer searches over those bases.

Both shipped subprotocols turn out to be perfectly separable this way:
the Bell classes differ in the sign of Y(x)Y, and the three-qubit classes
yield to an adaptive Z/X sequence. Only the full hiding scheme, which
mixes over both classes, keeps the secret.
"""

import math

import numpy as np

from qdh.fiveparty import bell_subprotocol, upb_subprotocol
from qdh.security import helstrom, local_success, optimize_local_attack, xor_amplify

for sp in (bell_subprotocol(), upb_subprotocol()):
    res = optimize_local_attack(sp, restarts=64, rng_seed=5)
    print(f"{sp.name}: best success {res.success:.12f}, delta {res.delta:.3e}, order {res.order}, "
          f"Helstrom {helstrom(*sp.mixtures):.3f}")
    for (party, after), (th, ph) in res.strategy().items():
        print(f"    {party} after {after}: theta={th:6.1f} phi={ph:6.1f}")

# the hand-made strategies
z, x, y = (0.0, 0.0), (math.pi / 2, 0.0), (math.pi / 2, math.pi / 2)
print("bell, both measure Y:", local_success(bell_subprotocol(), ("A", "B"), [y] * 3))
print("upb, adaptive Z/X:", local_success(upb_subprotocol(), ("C", "D", "E"), [z, z, x, z, z, z, x]))

# what amplification would give for a hypothetical per-block bias
for delta in (0.5, 0.9, 0.99):
    print(delta, [f"{xor_amplify(delta, n):.2e}" for n in (1, 8, 32)])
