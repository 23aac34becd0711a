"""
An unextendible product basis on three qubits
=============================================

Four product states of C, D, E that no fifth product state is orthogonal
to. The check enumerates how the members could be split between the
parties; with one member gone a witness appears.
"""

import numpy as np

from qdh.fiveparty import upb_family
from qdh.upb import check_orthogonality, check_unextendible, witness_overlaps

fam = upb_family(np.pi / 4)
print("orthogonal:", check_orthogonality(fam).orthogonal)
res = check_unextendible(fam)
print("unextendible:", res.unextendible, "after", res.assignments_checked, "assignments")

for k in range(len(fam)):
    sub = fam.without(k)
    r = check_unextendible(sub)
    w = [np.round(np.real_if_close(v), 3).tolist() for v in r.witness]
    print(f"without member {k}: extendible via assignment {r.assignment}, witness {w}, "
          f"max overlap {witness_overlaps(sub, r.witness).max():.1e}")

# the verdict does not depend on the angle of e
thetas = np.linspace(0.05, np.pi / 2 - 0.05, 12)
print("unextendible over theta grid:", all(check_unextendible(upb_family(t)).unextendible for t in thetas))
