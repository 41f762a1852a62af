"""Two different 1D periodic sets whose density functions coincide.

U + V and U - V (mod 15) with U = {0, 4, 9} and V = {0, 1, 3} are not
related by any isometry, yet every rho_k agrees to round-off. Equal pairwise
difference multisets are not enough for this in general: the stacked pair in
homometric_stacks.py shares them too but has different 1D densities.

    python demos/one_dimensional_twins.py
"""

import numpy as np

from density_fingerprint import lattice as lat
from density_fingerprint.fingerprint import FingerprintConfig, fingerprint_distance, psi_table

U, V, PERIOD = [0, 4, 9], [0, 1, 3], 15


def chain(points):
    return lat.periodic_set([[PERIOD]], [[p / PERIOD] for p in points])


def differences(points):
    return sorted((a - b) % PERIOD for a in points for b in points if a != b)


plus = sorted({(u + v) % PERIOD for u in U for v in V})
minus = sorted({(u - v) % PERIOD for u in U for v in V})
print("U+V:", plus)
print("U-V:", minus)
print("same difference multiset:", differences(plus) == differences(minus))

cfg = FingerprintConfig(kmax=8, t_steps=256)
fa = psi_table(chain(plus), cfg)
fb = psi_table(chain(minus), cfg, tgrid=fa.tgrid)
d, per_k = fingerprint_distance(fa, fb, per_k=True)
print(f"fingerprint distance {d:.2e}")
print("per-k max |rho difference|:", np.array2string(per_k, precision=2))
