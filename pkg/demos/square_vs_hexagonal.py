"""Square and hexagonal lattices of unit cell area, compared through rho_0..rho_8.

The table printed at the end is the radius at which each rho_k peaks and the
largest gap between the two curves. The hexagonal lattice has six nearest
neighbours at equal distance, so its rho_k switch on in larger jumps.

    python demos/square_vs_hexagonal.py [--steps 400]
"""

import argparse

import numpy as np

from density_fingerprint import lattice as lat
from density_fingerprint.fingerprint import FingerprintConfig, fingerprint_distance, psi_table

parser = argparse.ArgumentParser()
parser.add_argument("--steps", type=int, default=400)
args = parser.parse_args()

square = lat.periodic_set([[1, 0], [0, 1]], [[0, 0]])
hexagonal = lat.PeriodicSet(lat.hexagonal_lattice(np.sqrt(2 / np.sqrt(3))), [[0, 0]])
print(f"cell areas: square {square.lattice.volume:.6f}, hexagonal {hexagonal.lattice.volume:.6f}")

R = max(lat.covering_radius(square), lat.covering_radius(hexagonal))
tgrid = np.linspace(0.0, 4.0 * R, args.steps)
cfg = FingerprintConfig(kmax=8, t_steps=args.steps)
fs = psi_table(square, cfg, tgrid)
fh = psi_table(hexagonal, cfg, tgrid)

d, per_k = fingerprint_distance(fs, fh, per_k=True)
print(" k  peak t (sq)  peak t (hex)  max |gap|")
for k in range(cfg.kmax + 1):
    ps, ph = tgrid[np.argmax(fs.rho[k])], tgrid[np.argmax(fh.rho[k])]
    print(f"{k:2d}  {ps:11.3f}  {ph:12.3f}  {per_k[k]:9.4f}")
print(f"fingerprint distance {d:.4f}")
