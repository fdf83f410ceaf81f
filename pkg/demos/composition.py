"""Biharmonic maps through a small hypersphere.

S^m(1/sqrt2) sits in S^{m+1}(a) which sits in S^{m+2}.  The tension and
bitension of the composite agree with the formulas written through the
inner map, and |tau(j)|^2 lands on m^2(2a^2 - 1)/a^2.
"""

from biharm import biharmonic as bh
from biharm import catalog

R = catalog.INV_SQRT2

for a in [0.75, 0.9, 0.95]:
    for m in (1, 2):
        inner = catalog.sphere_in_sphere(m, R, a)
        rep = bh.composition_codim2(inner, a, inner.sample_points(3))
        print(f"a = {a}, m = {m}: tau err {rep.tau_residual:.1e}, tau2 err {rep.tau2_residual:.1e}, "
              f"|tau(j)|^2 = {rep.tau_j_sq.mean():.6f} (needs {rep.tau_j_sq_required:.6f})  {rep.verdict}")

# minimal inner map: a great sphere of S^{m+1}(1/sqrt2)
rep = bh.composition_codim2(catalog.sphere_in_sphere(2, R, R), R)
print("minimal inner, a = 1/sqrt2:", rep.verdict)
