"""Generalized Clifford tori S^m1(r1) x S^m2(r2) in S^{m+1}.

For unequal factor dimensions only r1 = r2 = 1/sqrt2 is proper biharmonic;
equal dimensions give the minimal Clifford torus there instead.
"""

import math

import numpy as np

from biharm import biharmonic as bh
from biharm import catalog, geometry as geo

R = catalog.INV_SQRT2

for m1, m2 in [(1, 2), (1, 1), (2, 3)]:
    print(f"S^{m1} x S^{m2}")
    for r1 in [0.5, 0.6, R, 0.8]:
        patch = catalog.clifford_product(m1, m2, r1, math.sqrt(1 - r1 * r1))
        rep = bh.residual_hypersurface(patch, patch.sample_points(3))
        print(f"  r1 = {r1:.4f}  first eq {rep.max_norms['first']:.2e}  "
              f"|A|^2 - m {rep.extras['A_squared_minus_mc']:+.3e}  {rep.verdict}")

# principal curvatures and the scalar curvature at the biharmonic radius
patch = catalog.clifford_product(1, 2, R, R)
print("principal curvatures:", [(round(float(k), 6), n) for k, n in geo.principal_curvatures(patch, patch.center)])
print("scalar curvature:", float(geo.scalar_curvature(patch, patch.center)))

# the identity m|H|^2 = |A_H|^2 + |nabla H|^2 and its Cauchy-Schwarz slack
rep = bh.identity_cmc(patch)
print(f"identity residual {rep.residual:.1e}, slack {rep.slack:.4f}, m|H|^2 = {np.mean(rep.mH2):.4f}")
