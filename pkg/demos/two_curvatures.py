"""Exact bookkeeping for hypersurfaces with two principal curvatures.

Eliminating f'' and f'^2 from the two ODE relations leaves a polynomial
identity D(f^2) = 0.  Whenever D has a non-constant part, f must be constant.
The audit recomputes every elimination from the relations themselves.
"""

from biharm import analysis

for m in [2, 3, 5, 8]:
    sys_ = analysis.two_curvature_system(m, 1)
    print(f"m = {m}: D = {sys_.D}")
    print(f"        audit D = {sys_.audit['D']}  ({sys_.audit['verdict']})")

sys_ = analysis.two_curvature_system(4, 1)
print(f"m = 4: {sys_.verdict}; the f f'' term drops out, leaving 0 = {sys_.prel_f[1]}")

# constant solutions always satisfy |A|^2 = m c
for m in [2, 3, 6]:
    f2, A2 = analysis.constant_solution(m, 1)
    print(f"m = {m}: f^2 = {f2}, |A|^2 = {A2}")

print("hyperbolic space:", analysis.hyperbolic_nonexistence(3, -1))
print("coefficient clash at m = 4:", analysis.pseudo_umbilical_coefficient_clash(4).verdict)
