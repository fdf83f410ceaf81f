"""Independent oracles for golden values.

Nothing here imports the package under test.  Symbolic work uses sympy,
numeric work plain numpy.
"""

import math
from fractions import Fraction

import numpy as np
import sympy as sp

INV_SQRT2 = 1 / math.sqrt(2)


def umbilical_curvature(a):
    """Principal curvature of S^m(a) at height sqrt(1-a^2) in the unit S^{m+1}."""
    return math.sqrt(1 - a * a) / a


def umbilical_normal_residual(m, a):
    k = umbilical_curvature(a)
    return m * abs(1 - k * k) * k


def umbilical_bitension(m, a):
    """|tau2| = m^2 k |1 - k^2| from tau2 = -m(Delta H - m H) with H = k eta parallel."""
    return m * umbilical_normal_residual(m, a)


def product_curvatures(m1, m2, r1, r2):
    """Principal curvatures (value, multiplicity) of S^m1(r1) x S^m2(r2) for one unit normal."""
    return [(r2 / r1, m1), (-r1 / r2, m2)]


def product_mean_curvature(m1, m2, r1, r2):
    return abs(sum(k * n for k, n in product_curvatures(m1, m2, r1, r2))) / (m1 + m2)


def product_normal_residual(m1, m2, r1, r2):
    """|f| * ||A|^2 - m| for the CMC product hypersurface (parallel H)."""
    m = m1 + m2
    A2 = sum(k * k * n for k, n in product_curvatures(m1, m2, r1, r2))
    return product_mean_curvature(m1, m2, r1, r2) * abs(A2 - m)


def geodesic_mean_curvature(s):
    """Curvature of t -> (cos at, sin at, cos bt, sin bt)/sqrt2 with a^2 = 1+s, b^2 = 1-s, in S^3."""
    al2, be2 = 1 + s, 1 - s
    return math.sqrt(0.5 * (1 - al2) ** 2 + 0.5 * (1 - be2) ** 2)


def circle_eigenvalue(radius):
    """Coordinate eigenvalue of a circle of the given radius: (2 pi / L)^2."""
    L = 2 * math.pi * radius
    return (2 * math.pi / L) ** 2


def sphere_chart_metric(a, u_val):
    """Metric and Gamma^u_vv of (u, v) -> a (cos u, sin u cos v, sin u sin v) by sympy."""
    u, v = sp.symbols("u v")
    x = sp.Matrix([a * sp.cos(u), a * sp.sin(u) * sp.cos(v), a * sp.sin(u) * sp.sin(v)])
    J = x.jacobian([u, v])
    g = sp.simplify(J.T * J)
    ginv = g.inv()
    coords = [u, v]
    gamma = sum(ginv[0, l] * (sp.diff(g[l, 1], v) + sp.diff(g[l, 1], v) - sp.diff(g[1, 1], coords[l])) / 2
                for l in range(2))
    subs = {u: u_val, v: 0.3}
    return np.array(g.subs(subs).evalf(), dtype=float), float(sp.simplify(gamma).subs(subs))


def displayed_eliminations(m, c):
    """D = derivata_1 - derivata_2 transcribed from the displayed formulas, as {power of f: Fraction}."""
    f, C = sp.symbols("f C")
    m_, c_ = sp.Rational(m), sp.Rational(c)
    d1 = (m_**2 * (m_**2 + 4 * m_ + 9) / (8 * (4 - m_) * (m_ - 1)) * f**4
          - (m_**2 + 3 * m_ - 1) / (2 * (4 - m_)) * c_ * f**2 + C)
    d2 = (m_**2 * (m_ + 5) * (m_ + 2) / (4 * (4 - m_) * (m_ - 1)) * f**4
          - (2 * m_ + 1) * (m_ + 2) / (3 * (4 - m_)) * c_ * f**2)
    poly = sp.Poly(sp.expand(d1 - d2 - C), f)
    return {k[0]: Fraction(str(v)) for k, v in zip(poly.monoms(), poly.coeffs())}


def rederived_eliminations(m, c):
    """Eliminate f f'' and f'^2 from the two ODE relations symbolically and integrate.

    Returns ({power: coeff} of derivata_1 without C, {power: coeff} of derivata_2).
    """
    f, fp, fpp = sp.symbols("f fp fpp")
    m_, c_ = sp.Rational(m), sp.Rational(c)
    first = f * fpp - 3 * (m_ - 1) / (m_ + 2) * fp**2 - m_**2 * (m_ + 8) / (4 * (m_ - 1)) * f**4 + m_ * c_ * f**2
    second = f * fpp - (m_ + 5) / (m_ + 2) * fp**2 + m_**2 * (m_ + 2) / (4 * (m_ - 1)) * f**4 - (m_ + 2) / 3 * c_ * f**2
    sol = sp.solve([first, second], [fpp, fp**2], dict=True)[0]
    fp2 = sp.expand(sol[fp**2])
    # f f'' in terms of f only: (4-m) f f'' = R(f); integrate (4-m) f' f'' = R(f) f'/f
    ffpp = sp.expand(f * sol[fpp].subs(fp**2, fp2))
    R = sp.expand((4 - m_) * ffpp)
    t = sp.symbols("t")
    integral = sp.integrate((R / f).subs(f, t), (t, 0, f))
    d1 = sp.expand(2 * integral / (4 - m_))
    to_dict = lambda e: {k[0]: Fraction(str(v)) for k, v in zip(sp.Poly(e, f).monoms(), sp.Poly(e, f).coeffs())}
    return to_dict(d1), to_dict(fp2)


def central_second_difference(fn, x, h=1e-4):
    return (fn(x + h) - 2 * fn(x) + fn(x - h)) / (h * h)
