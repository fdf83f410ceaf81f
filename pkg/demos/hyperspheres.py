"""Which small hyperspheres are biharmonic.

Walks the radius a of S^2(a) inside S^3 and prints the normal residual of
the biharmonic system next to its closed form.  Only a = 1/sqrt2 gives zero.
"""

import math

from biharm import biharmonic as bh
from biharm import catalog

m = 2
print(f"{'a':>8} {'k = |H|':>8} {'residual':>12} {'closed form':>12}  verdict")
for a in [0.5, 0.6, 0.65, 0.7, catalog.INV_SQRT2, 0.75, 0.8, 0.9, 1.0]:
    patch = catalog.small_hypersphere(m, a)
    pts = patch.sample_points(3)
    rep = bh.residual_general(patch, pts)
    k = math.sqrt(1 - a * a) / a  # principal curvature
    closed = m * abs(1 - k * k) * k
    print(f"{a:8.4f} {k:8.4f} {rep.max_norms['normal']:12.3e} {closed:12.3e}  {rep.verdict}")

# the biharmonic one has |H| = 1 and bitension zero up to FD error
patch = catalog.small_hypersphere(m, catalog.INV_SQRT2)
tau2 = bh.bitension_sphere(patch, patch.sample_points(3))
print("max |tau2| at a = 1/sqrt2:", abs(tau2).max())
