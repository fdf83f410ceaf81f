"""Explicit immersions into round spheres with exact jets.

Every constructor returns an :class:`~biharm.geometry.ImmersionPatch` whose map
is built from the elementary jet operations, so all derivatives are exact.
Sphere factors use polar charts restricted to an interior box; circle factors
are periodic.

The registry (:data:`ENTRIES`) exposes each constructor with its parameter
schema and the properties the engine is expected to confirm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import ImmersionPatch, mean_curvature
from .jetcalc import cos, sin

INV_SQRT2 = 1.0 / math.sqrt(2.0)
POLAR_MARGIN = 0.2
SPHERE_TOL = 1e-12
TWO_PI = 2.0 * math.pi


class CatalogError(ValueError):
    pass


# ---------------------------------------------------------------------------
# charts


def sphere_chart(k: int) -> Callable:
    """Unit S^k in R^{k+1}: polar angles first, azimuth last."""

    def chart(angles):
        if k == 1:
            return [cos(angles[0]), sin(angles[0])]
        *thetas, psi = angles
        coords = []
        s = 1.0
        for th in thetas:
            coords.append(s * cos(th))
            s = s * sin(th)
        return coords + [s * cos(psi), s * sin(psi)]

    return chart


def sphere_box(k: int):
    lower = [POLAR_MARGIN] * (k - 1) + [0.0]
    upper = [math.pi - POLAR_MARGIN] * (k - 1) + [TWO_PI]
    periodic = [False] * (k - 1) + [True]
    return lower, upper, periodic


def _product(factors):
    """Concatenate maps ``(dim_i, map_i)`` acting on consecutive parameter slices."""

    def f(x):
        out, i = [], 0
        for d, g in factors:
            out += list(g(x[i:i + d]))
            i += d
        return out

    return f


def _is(x: float, y: float, tol: float = 1e-12) -> bool:
    return abs(x - y) <= tol


# ---------------------------------------------------------------------------
# constructors


def small_hypersphere(m: int, a: float) -> ImmersionPatch:
    """S^m(a) at height sqrt(1-a^2) inside S^{m+1}; a = 1 gives a great sphere."""
    if m < 1:
        raise CatalogError("m must be >= 1")
    if not 0.0 < a <= 1.0:
        raise CatalogError("radius a must lie in (0, 1]")
    chart = sphere_chart(m)
    height = math.sqrt(max(0.0, 1.0 - a * a))
    lower, upper, periodic = sphere_box(m)
    return ImmersionPatch(
        name=f"small_hypersphere(m={m}, a={a:.6g})", dim=m, ambient_dim=m + 2,
        lower=tuple(lower), upper=tuple(upper), periodic=tuple(periodic),
        map=lambda x: [a * c for c in chart(x)] + [height],
        params={"m": m, "a": a})


def clifford_product(m1: int, m2: int, r1: float, r2: float) -> ImmersionPatch:
    """S^{m1}(r1) x S^{m2}(r2) in S^{m1+m2+1}, r1^2 + r2^2 = 1."""
    if m1 < 1 or m2 < 1:
        raise CatalogError("factor dimensions must be >= 1")
    if r1 <= 0 or r2 <= 0 or abs(r1 * r1 + r2 * r2 - 1.0) > SPHERE_TOL:
        raise CatalogError("radii must satisfy r1^2 + r2^2 = 1")
    c1, c2 = sphere_chart(m1), sphere_chart(m2)
    l1, u1, p1 = sphere_box(m1)
    l2, u2, p2 = sphere_box(m2)
    fmap = _product([(m1, lambda x: [r1 * c for c in c1(x)]),
                     (m2, lambda x: [r2 * c for c in c2(x)])])
    return ImmersionPatch(
        name=f"clifford_product({m1}, {m2}, {r1:.6g}, {r2:.6g})", dim=m1 + m2,
        ambient_dim=m1 + m2 + 2, lower=tuple(l1 + l2), upper=tuple(u1 + u2),
        periodic=tuple(p1 + p2), map=fmap,
        params={"m1": m1, "m2": m2, "r1": r1, "r2": r2})


def biharmonic_circle(a: float) -> ImmersionPatch:
    """Arclength circle of radius a in S^3."""
    if not 0.0 < a <= 1.0:
        raise CatalogError("radius a must lie in (0, 1]")
    height = math.sqrt(max(0.0, 1.0 - a * a))
    return ImmersionPatch(
        name=f"biharmonic_circle(a={a:.6g})", dim=1, ambient_dim=4,
        lower=(0.0,), upper=(TWO_PI * a,), periodic=(True,),
        map=lambda x: [a * cos(x[0] / a), a * sin(x[0] / a), height, 0.0],
        params={"a": a})


def clifford_geodesic(s: float, length: float = 8 * math.pi) -> ImmersionPatch:
    """Arclength geodesic of the Clifford torus S^1(1/sqrt2) x S^1(1/sqrt2) in S^3.

    Frequencies ``alpha^2 = 1 + s`` and ``beta^2 = 1 - s``; ``s = 0`` is the
    slope +-1 great circle.  For ``s > 0`` the curve is generally not closed,
    so the chart is the segment ``[0, length]``.
    """
    if not 0.0 <= s < 1.0:
        raise CatalogError("slope parameter s must lie in [0, 1)")
    al, be = math.sqrt(1.0 + s), math.sqrt(1.0 - s)
    closed = s == 0.0
    upper = TWO_PI if closed else length
    return ImmersionPatch(
        name=f"clifford_geodesic(s={s:.6g})", dim=1, ambient_dim=4,
        lower=(0.0,), upper=(upper,), periodic=(closed,),
        map=lambda x: [INV_SQRT2 * cos(al * x[0]), INV_SQRT2 * sin(al * x[0]),
                       INV_SQRT2 * cos(be * x[0]), INV_SQRT2 * sin(be * x[0])],
        params={"s": s})


def antiinvariant_torus() -> ImmersionPatch:
    """Flat 3-torus in S^5 given in complex form by

        x0(u, v, w) = e^{iw} (e^{iu}, i e^{-iu} sin(sqrt2 v), i e^{-iu} cos(sqrt2 v)) / sqrt2,

    written here as six real coordinates.
    """
    r2 = math.sqrt(2.0)

    def fmap(x):
        u, v, w = x
        p, q = u + w, w - u
        sv, cv = sin(r2 * v), cos(r2 * v)
        return [INV_SQRT2 * cos(p), INV_SQRT2 * sin(p),
                -INV_SQRT2 * sv * sin(q), INV_SQRT2 * sv * cos(q),
                -INV_SQRT2 * cv * sin(q), INV_SQRT2 * cv * cos(q)]

    return ImmersionPatch(
        name="antiinvariant_torus", dim=3, ambient_dim=6,
        lower=(0.0, 0.0, 0.0), upper=(TWO_PI, math.pi * r2, TWO_PI),
        periodic=(True, True, True), map=fmap, params={})


def embed_in_sphere(inner: ImmersionPatch, height: float, name: str | None = None) -> ImmersionPatch:
    """Append a constant coordinate: M in S^{k}(r) becomes M in S^{k+1}(sqrt(r^2 + h^2))."""
    if inner.radius is None:
        raise CatalogError("inner patch must lie in a sphere")
    f = inner.map
    return ImmersionPatch(
        name=name or f"{inner.name} at height {height:.6g}", dim=inner.dim,
        ambient_dim=inner.ambient_dim + 1, lower=inner.lower, upper=inner.upper,
        periodic=inner.periodic, map=lambda x: list(f(x)) + [height],
        radius=math.hypot(inner.radius, height), params=dict(inner.params, height=height))


def composed_minimal(inner: ImmersionPatch, tol: float = 1e-8) -> ImmersionPatch:
    """Rescale a minimal submanifold of a unit sphere into S^{n-1}(1/sqrt2) inside S^n."""
    if inner.radius is None or not _is(inner.radius, 1.0):
        raise CatalogError("inner patch must lie in a unit sphere")
    H = mean_curvature(inner, inner.sample_points(4))
    if np.max(np.linalg.norm(H, axis=-1)) > tol:
        raise CatalogError(f"{inner.name} is not minimal")
    return embed_in_sphere(inner.scaled(INV_SQRT2), INV_SQRT2, name=f"composed_minimal({inner.name})")


def clifford_minimal_hypersurface(m: int) -> ImmersionPatch:
    """Minimal S^1(sqrt(1/m)) x S^{m-1}(sqrt((m-1)/m)) in the unit S^{m+1}."""
    if m < 2:
        raise CatalogError("m must be >= 2")
    return clifford_product(1, m - 1, math.sqrt(1.0 / m), math.sqrt((m - 1) / m))


def circle_cross_minimal(m: int) -> ImmersionPatch:
    """S^1(1/sqrt2) x M^m in S^{m+3}, M the minimal Clifford hypersurface of S^{m+1}(1/sqrt2)."""
    if m < 2:
        raise CatalogError("m must be >= 2")
    M = clifford_minimal_hypersurface(m).scaled(INV_SQRT2)
    circle = lambda x: [INV_SQRT2 * cos(x[0]), INV_SQRT2 * sin(x[0])]
    fmap = _product([(1, circle), (m, M.map)])
    return ImmersionPatch(
        name=f"circle_cross_minimal(m={m})", dim=m + 1, ambient_dim=m + 4,
        lower=(0.0,) + M.lower, upper=(TWO_PI,) + M.upper, periodic=(True,) + M.periodic,
        map=fmap, params={"m": m})


def sphere_in_sphere(m: int, r: float, a: float) -> ImmersionPatch:
    """S^m(r) as a small hypersphere of S^{m+1}(a) (a patch of radius a)."""
    if not 0.0 < r <= a:
        raise CatalogError("need 0 < r <= a")
    chart = sphere_chart(m)
    height = math.sqrt(max(0.0, a * a - r * r))
    lower, upper, periodic = sphere_box(m)
    return ImmersionPatch(
        name=f"sphere_in_sphere(m={m}, r={r:.6g}, a={a:.6g})", dim=m, ambient_dim=m + 2,
        lower=tuple(lower), upper=tuple(upper), periodic=tuple(periodic),
        map=lambda x: [r * c for c in chart(x)] + [height], radius=a,
        params={"m": m, "r": r, "a": a})


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class Expected:
    value: object
    provenance: str
    tol: float | None = None


@dataclass(frozen=True)
class Param:
    kind: type
    default: object
    valid: str


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    build: Callable
    params: dict
    expected: Callable = field(default=lambda **kw: {})
    doc: str = ""

    def resolve(self, given: dict) -> dict:
        unknown = set(given) - set(self.params)
        if unknown:
            raise CatalogError(f"{self.name}: unknown parameter(s) {sorted(unknown)}")
        out = {}
        for k, pdef in self.params.items():
            v = given.get(k, pdef.default)
            if v is None:
                raise CatalogError(f"{self.name}: parameter {k!r} is required")
            out[k] = pdef.kind(v)
        return out

    def __call__(self, **params) -> ImmersionPatch:
        return self.build(**self.resolve(params))

    def expectations(self, **params) -> dict:
        return self.expected(**self.resolve(params))


def _bih_verdict(harmonic: bool, proper: bool) -> str:
    return "harmonic" if harmonic else ("proper_biharmonic" if proper else "not_biharmonic")


def _hypersphere_expected(m, a):
    k = math.sqrt(1 - a * a) / a
    return {
        "verdict": Expected(_bih_verdict(_is(a, 1.0), _is(a, INV_SQRT2)),
                            "hypersphere S^m(a) is proper biharmonic iff a = 1/sqrt2"),
        "mean_curvature": Expected(k, "umbilical closed form sqrt(1-a^2)/a", 1e-6),
        "normal_residual": Expected(m * abs(1 - k * k) * k, "umbilical closed form m|1-k^2|k", 1e-4),
    }


def _product_expected(m1, m2, r1, r2):
    m = m1 + m2
    f = (m1 * r2 / r1 - m2 * r1 / r2) / m
    proper = _is(r1, INV_SQRT2, 1e-9) and m1 != m2
    return {
        "verdict": Expected(_bih_verdict(abs(f) < 1e-12, proper),
                            "product of spheres is proper biharmonic iff r1 = r2 = 1/sqrt2, m1 != m2"),
        "mean_curvature": Expected(abs(f), "principal curvatures r2/r1 (x m1), -r1/r2 (x m2)", 1e-6),
    }


def _circle_expected(a):
    return {
        "verdict": Expected(_bih_verdict(_is(a, 1.0), _is(a, INV_SQRT2)),
                            "circle of radius 1/sqrt2 is the proper biharmonic circle"),
        "mean_curvature": Expected(math.sqrt(1 - a * a) / a, "curvature of a small circle", 1e-6),
        **({"chen_type": Expected(1, "1-type, eigenvalue 2m"),
            "eigenvalues": Expected([2.0], "1-type, eigenvalue 2m", 1e-3)} if _is(a, INV_SQRT2) else {}),
    }


def _geodesic_expected(s, length=None):
    out = {
        "verdict": Expected(_bih_verdict(s == 0.0, s > 0.0),
                            "Clifford torus geodesics of slope != +-1 are proper biharmonic"),
        "mean_curvature": Expected(s, "arclength computation |H| = s", 1e-6),
    }
    if s > 0:
        out["chen_type"] = Expected(2, "frequencies alpha^2 = 1+s, beta^2 = 1-s")
        out["eigenvalues"] = Expected([1 - s, 1 + s], "frequencies alpha^2, beta^2", 1e-3)
    return out


def _torus_expected():
    return {
        "verdict": Expected("proper_biharmonic", "proper biharmonic anti-invariant 3-torus"),
        "mean_curvature": Expected(1 / 3, "|H| = 1/3", 1e-5),
        "chen_type": Expected(2, "2-type with eigenvalues 2 and 4"),
        "eigenvalues": Expected([2.0, 4.0], "2-type with eigenvalues 2 and 4", 1e-2),
        "parallel_H": Expected(True, "direct computation: H = (x_2 - x_4)/3 with x_2, x_4 the eigencomponents"
                                     " of eigenvalues 2 and 4, so D_X H is tangent for every X"),
        "pseudo_umbilical": Expected(False, "not pseudo-umbilical"),
    }


def _composed_expected(**_):
    return {
        "verdict": Expected("proper_biharmonic", "minimal in S^{n-1}(1/sqrt2) is proper biharmonic"),
        "mean_curvature": Expected(1.0, "minimal in S^{n-1}(1/sqrt2) has |H| = 1", 1e-6),
        "pseudo_umbilical": Expected(True, "minimal in S^{n-1}(1/sqrt2) is pseudo-umbilical"),
        "parallel_H": Expected(True, "minimal in S^{n-1}(1/sqrt2) has parallel H"),
    }


def _cross_expected(m):
    h = (m - 1) / (m + 1)
    dim = m + 1
    return {
        "verdict": Expected("proper_biharmonic", "S^1(1/sqrt2) x minimal hypersurface of S^{m+1}(1/sqrt2)"),
        "mean_curvature": Expected(h, "product with unequal factor dimensions: |m1-m2|/(m1+m2)", 1e-6),
        "pseudo_umbilical": Expected(False, "distinct A_H eigenvalues"),
        "chen_type": Expected(2, "CMC with |H|^2 in (0,1)"),
        "eigenvalues": Expected([dim * (1 - h), dim * (1 + h)], "m(1 -+ |H|)", 1e-2),
    }


def _composed_clifford_torus():
    return composed_minimal(clifford_product(1, 1, INV_SQRT2, INV_SQRT2))


def _composed_great_circle():
    return composed_minimal(small_hypersphere(1, 1.0))


ENTRIES: dict[str, CatalogEntry] = {
    e.name: e for e in [
        CatalogEntry("small_hypersphere", small_hypersphere,
                     {"m": Param(int, 2, "m >= 1"), "a": Param(float, INV_SQRT2, "0 < a <= 1")},
                     _hypersphere_expected, "S^m(a) inside S^{m+1}"),
        CatalogEntry("clifford_product", clifford_product,
                     {"m1": Param(int, 1, ">= 1"), "m2": Param(int, 2, ">= 1"),
                      "r1": Param(float, INV_SQRT2, "r1^2 + r2^2 = 1"),
                      "r2": Param(float, None, "defaults to sqrt(1 - r1^2)")},
                     _product_expected, "generalized Clifford torus S^m1(r1) x S^m2(r2)"),
        CatalogEntry("biharmonic_circle", biharmonic_circle,
                     {"a": Param(float, INV_SQRT2, "0 < a <= 1")}, _circle_expected,
                     "circle of radius a in S^3"),
        CatalogEntry("clifford_geodesic", clifford_geodesic,
                     {"s": Param(float, 0.5, "0 <= s < 1"), "length": Param(float, 8 * math.pi, "> 0")},
                     _geodesic_expected, "geodesic of the Clifford torus in S^3"),
        CatalogEntry("antiinvariant_torus", antiinvariant_torus, {}, _torus_expected,
                     "biharmonic anti-invariant flat 3-torus in S^5"),
        CatalogEntry("composed_clifford_torus", _composed_clifford_torus, {}, _composed_expected,
                     "minimal Clifford torus of S^3 rescaled into S^3(1/sqrt2) inside S^4"),
        CatalogEntry("composed_great_circle", _composed_great_circle, {}, _composed_expected,
                     "great circle of S^2 rescaled into S^2(1/sqrt2) inside S^3"),
        CatalogEntry("circle_cross_minimal", circle_cross_minimal,
                     {"m": Param(int, 2, "m >= 2")}, _cross_expected,
                     "S^1(1/sqrt2) x minimal Clifford hypersurface, codimension 2"),
        CatalogEntry("sphere_in_sphere", sphere_in_sphere,
                     {"m": Param(int, 2, ">= 1"), "r": Param(float, INV_SQRT2, "0 < r <= a"),
                      "a": Param(float, 0.9, "0 < a < 1")},
                     lambda **kw: {}, "S^m(r) inside S^{m+1}(a); a patch of radius a"),
    ]
}


def _fill_r2(params: dict) -> dict:
    if "r1" in params and params.get("r2") is None:
        params = dict(params, r2=math.sqrt(1.0 - float(params["r1"]) ** 2))
    return params


def build(name: str, params: dict | None = None) -> ImmersionPatch:
    """Construct a registry entry by name."""
    if name not in ENTRIES:
        raise CatalogError(f"unknown catalog entry {name!r}")
    params = dict(params or {})
    if name == "clifford_product":
        params = _fill_r2(dict({"r1": INV_SQRT2}, **params))
    return ENTRIES[name](**params)


def expectations(name: str, params: dict | None = None) -> dict:
    params = dict(params or {})
    if name == "clifford_product":
        params = _fill_r2(dict({"r1": INV_SQRT2}, **params))
    return ENTRIES[name].expectations(**params)
