"""
Revealing or burning the secret
===============================

Measuring S in the computational basis and announcing t lets each group
measure its class label; the labels plus t give b. Measuring S in the
|+>, |-> basis instead leaves the receivers with nothing about b.
"""

from collections import Counter

from qdh.fiveparty import five_party_scheme
from qdh.measurement import make_rng, spawn_seeds
from qdh.protocol import authorized_decode, burn_branches, parallel_blocks, reveal, verify_burn

scheme = five_party_scheme()
rng = make_rng(2024)

# a few single reveals
for seed in spawn_seeds(1, 5):
    r = make_rng(seed)
    b = int(r.integers(2))
    ci = int(r.integers(len(scheme.candidates[b])))
    res = reveal(scheme, b, ci, seed)
    got, labels = authorized_decode(scheme, res, seed + 1)
    print(f"b={b} candidate={ci:2d} t={res.t} labels={labels} decoded={got}")

# many reveals
hits = Counter()
for seed in spawn_seeds(2, 2000):
    r = make_rng(seed)
    b = int(r.integers(2))
    res = reveal(scheme, b, int(r.integers(16)), seed)
    hits[authorized_decode(scheme, res, seed)[0] == b] += 1
print("correct decodes:", hits[True], "of", sum(hits.values()))

# eight bits in parallel blocks
bits = tuple(int(x) for x in rng.integers(2, size=8))
inst = parallel_blocks(scheme, 8, bits, rng_seed=3)
print("sent", bits, "recovered", inst.authorized_decode(rng_seed=4))

# burn: both outcomes leave states that do not depend on b
print(verify_burn(scheme, 1e-12))
for b in (0, 1):
    br = burn_branches(scheme, b, 0)
    print(f"b={b}: burn outcomes {[x.t for x in br]} with probabilities {[round(x.probability, 3) for x in br]}")
