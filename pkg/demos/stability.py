"""Perturb Z^3 with a two-point motif and watch d_F against C * d_B.

C = 13 R^2 / r^3 uses the smaller packing radius and the larger covering
radius of each pair. The observed ratios d_F / d_B are typically far below C.

    python demos/stability.py [--trials 10]
"""

import argparse

from density_fingerprint import lattice as lat
from density_fingerprint.compare import stability_trial
from density_fingerprint.fingerprint import FingerprintConfig

parser = argparse.ArgumentParser()
parser.add_argument("--trials", type=int, default=10)
args = parser.parse_args()

pset = lat.periodic_set([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [[0, 0, 0], [0.5, 0.5, 0.5]])
r = lat.packing_radius(pset)
print(f"body-centred cubic: packing radius {r:.4f}, covering radius {lat.covering_radius(pset):.4f}")
cfg = FingerprintConfig(kmax=3, t_steps=64)
for frac in (0.01, 0.05, 0.2):
    rep = stability_trial(pset, frac * r, args.trials, cfg, seed=1)
    print(f"delta = {frac:.2f} r: max d_F/d_B = {rep.max_ratio:.3f}, C = {rep.lipschitz_C:.1f}, all within bound: {rep.all_satisfied}")
    for row in rep.rows[:3]:
        print(f"    trial {row.trial}: d_B {row.d_B:.4f}  d_F {row.d_F:.5f}")
