"""Tension and bitension fields and the biharmonic characterization systems.

For an isometric immersion into the unit sphere the tension is ``tau = m H``.
The bitension is computed by composing with the inclusion into Euclidean
space: with ``t = -Delta phi`` and ``t2 = -Delta t`` taken componentwise,

    tau2(phi) = t2 + 2 m t + (2 m^2 - |t|^2) phi.

Residuals are ambient vectors; reports carry their Euclidean norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh

from . import geometry as geo
from . import jetcalc as jc
from .jetcalc import FdScheme, Jet

DEFAULT_TOL = 1e-5
NOT_BIHARMONIC_FACTOR = 10.0
DEFAULT_SCHEME = FdScheme()

HARMONIC = "harmonic"
PROPER = "proper_biharmonic"
NOT_BIHARMONIC = "not_biharmonic"
INCONCLUSIVE = "inconclusive"


class EmbeddingError(ValueError):
    pass


def classify(tension_max: float, residual_max: float, tol: float = DEFAULT_TOL) -> str:
    """Verdict from the largest tension and largest system residual."""
    if not np.isfinite(residual_max) or not np.isfinite(tension_max):
        return INCONCLUSIVE
    if tension_max <= tol:
        return HARMONIC
    if residual_max <= tol:
        return PROPER
    if residual_max > NOT_BIHARMONIC_FACTOR * tol:
        return NOT_BIHARMONIC
    return INCONCLUSIVE


@dataclass
class ResidualReport:
    """Per-point residual norms of a set of equations plus the verdict."""

    equation_ids: list
    points: np.ndarray  # (P, m), sorted
    residuals: np.ndarray  # (P, n_eq), NaN on failed points
    tension: np.ndarray  # (P,)
    tol: float
    failures: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def per_point(self) -> dict:
        return {tuple(p): dict(zip(self.equation_ids, r)) for p, r in zip(self.points, self.residuals)}

    @property
    def max_norms(self) -> dict:
        out = {}
        for k, e in enumerate(self.equation_ids):
            col = self.residuals[:, k]
            out[e] = float(np.nanmax(col)) if np.any(np.isfinite(col)) else math.nan
        return out

    @property
    def max_residual(self) -> float:
        if self.failures:
            return math.nan
        return float(np.max(self.residuals)) if self.residuals.size else 0.0

    @property
    def tension_max(self) -> float:
        return float(np.nanmax(self.tension)) if self.tension.size else 0.0

    @property
    def verdict(self) -> str:
        if self.failures and self.tension_max > self.tol:
            worst = np.nanmax(self.residuals) if np.any(np.isfinite(self.residuals)) else 0.0
            return NOT_BIHARMONIC if worst > NOT_BIHARMONIC_FACTOR * self.tol else INCONCLUSIVE
        return classify(self.tension_max, self.max_residual, self.tol)

    def summary(self) -> dict:
        return {"equations": self.max_norms, "tension_max": self.tension_max,
                "verdict": self.verdict, "tol": self.tol, "failures": list(self.failures),
                **{k: v for k, v in self.extras.items()}}


def sort_points(points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, float))
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def _run(patch, points, kernel: Callable, equation_ids, tol) -> ResidualReport:
    """Evaluate ``kernel(points) -> (residuals (P, k), tension (P,), extras)``.

    A failing batch is retried point by point so that one bad point is
    flagged instead of aborting the report.
    """
    pts = sort_points(points)
    try:
        res, ten, extras = kernel(pts)
        return ResidualReport(list(equation_ids), pts, res, ten, tol, [], extras)
    except (ValueError, np.linalg.LinAlgError):
        pass
    rows, tens, fails, extras = [], [], [], {}
    for p in pts:
        try:
            r, t, ex = kernel(p[None, :])
            rows.append(r[0])
            tens.append(t[0])
            for k, v in ex.items():
                extras.setdefault(k, []).append(v)
        except (ValueError, np.linalg.LinAlgError) as err:
            rows.append(np.full(len(equation_ids), np.nan))
            tens.append(np.nan)
            fails.append(f"{tuple(np.round(p, 6))}: {type(err).__name__}: {err}")
    extras = {k: float(np.nanmax(v)) for k, v in extras.items()}
    return ResidualReport(list(equation_ids), pts, np.array(rows), np.array(tens), tol, fails, extras)


def _norm(v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(v, axis=-1)


# ---------------------------------------------------------------------------
# tension and bitension


def tension(patch: geo.ImmersionPatch, point) -> np.ndarray:
    """tau = m H in ambient coordinates."""
    return patch.dim * geo.mean_curvature(patch, point)


def _flat_laplacian_of_map(patch: geo.ImmersionPatch, points) -> np.ndarray:
    """Delta phi componentwise (non-negative convention) from exact order-2 jets."""
    loc = geo.local_at(patch, points, 2)
    gamma = geo.christoffel_from_metric(loc.g)
    lap = np.einsum("...ij,...ijn->...n", loc.ginv.value, loc.hess.value)
    corr = np.einsum("...ij,...kij,...kn->...n", loc.ginv.value, gamma, loc.E.value)
    return -(lap - corr)


def _christoffel_jet(g: Jet, ginv: Jet) -> Jet:
    m = g.tail[-1]
    dg = Jet.stack([g.diff(l) for l in range(m)], axis=-3)  # [a, i, j] = d_a g_ij
    s = dg.swapaxes(-3, -1)  # s[l, i, j] = d_j g_il
    lowered = 0.5 * (s + s.swapaxes(-2, -1) - dg)
    return (ginv[..., :, :, None, None] * lowered[..., None, :, :, :]).sum(-3)


def _flat_laplacian_jet(patch: geo.ImmersionPatch, points) -> tuple[Jet, geo.Local]:
    """Order-2 jet of Delta phi from an order-4 jet of phi."""
    loc = geo.local_at(patch, points, 4)
    gamma = _christoffel_jet(loc.g, loc.ginv)
    m = patch.dim
    ginv, hess, E = loc.ginv, loc.hess, loc.E
    acc = None
    for i in range(m):
        for j in range(m):
            term = hess[..., i, j, :]
            for k in range(m):
                term = term - gamma[..., k, i, j][..., None] * E[..., k, :]
            term = ginv[..., i, j][..., None] * term
            acc = term if acc is None else acc + term
    return -acc, loc


def _unit(patch: geo.ImmersionPatch, rescale: bool) -> tuple[geo.ImmersionPatch, float]:
    if patch.radius is None:
        raise ValueError(f"{patch.name}: bitension needs a spherical ambient")
    R = float(patch.radius)
    if abs(R - 1.0) <= 1e-12:
        return patch, 1.0
    if not rescale:
        raise ValueError(f"{patch.name}: ambient radius {R:g} is not 1; pass rescale=True")
    return patch.scaled(1.0 / R), R


def euclidean_tension_pair(patch: geo.ImmersionPatch, points,
                           scheme: Optional[FdScheme] = DEFAULT_SCHEME):
    """(phi, t, t2) with t = -Delta phi and t2 = -Delta t, componentwise in R^N."""
    points = np.asarray(points, float)
    if scheme is None:
        lap, loc = _flat_laplacian_jet(patch, points)
        gamma = geo.christoffel_from_metric(loc.g.truncate(2))
        t = -lap
        t2 = geo._laplacian_from_jet(-t, loc.ginv.value, gamma)
        return loc.phi.value, t.value, t2
    phi = patch.evaluate(points)
    t = -_flat_laplacian_of_map(patch, points)
    loc = geo.local_at(patch, points, 2)
    gamma = geo.christoffel_from_metric(loc.g)
    tj = jc.fd_jet(lambda p: -_flat_laplacian_of_map(patch, patch.wrap(p)), points, 2, scheme, domain=patch)
    t2 = -geo._laplacian_from_jet(tj, loc.ginv.value, gamma)
    return phi, t, t2


def bitension_sphere(patch: geo.ImmersionPatch, point, scheme: Optional[FdScheme] = DEFAULT_SCHEME,
                     rescale: bool = False) -> np.ndarray:
    """tau2 of an immersion into a round sphere via the Euclidean composition formula.

    ``scheme=None`` differentiates exact order-4 jets instead of using finite
    differences for the outer Laplacian.  A patch of radius R is handled by
    rescaling to the unit sphere; tau2 scales like R^-3 under the homothety.
    """
    unit, R = _unit(patch, rescale)
    m = unit.dim
    phi, t, t2 = euclidean_tension_pair(unit, point, scheme)
    tt = np.einsum("...n,...n->...", t, t)[..., None]
    tau2 = t2 + 2 * m * t + (2 * m * m - tt) * phi
    return tau2 / R**3


# ---------------------------------------------------------------------------
# characterization systems


def _tangent_vector(coords: np.ndarray, E: np.ndarray) -> np.ndarray:
    return np.einsum("...k,...kn->...n", coords, E)


def general_terms(patch: geo.ImmersionPatch, points, scheme: Optional[FdScheme] = DEFAULT_SCHEME) -> dict:
    """All ingredients of the normal and tangent biharmonic equations."""
    nd = geo.normal_data(patch, points, scheme)
    loc = nd.loc
    m = patch.dim
    ginv, B, E, H = loc.ginv.value, loc.B.value, loc.E.value, nd.H
    # trace B(., A_H .) = g^{ij} g^{kl} <B_jl, H> B_ik
    h_H = np.einsum("...ijn,...n->...ij", B, H)
    trace_BAH = np.einsum("...ij,...kl,...jl,...ikn->...n", ginv, ginv, h_H, B)
    # trace A_{nabla_(.) H}(.) = g^{ij} g^{kl} <B_jl, nabla_i H> E_k
    coords = np.einsum("...ij,...kl,...jln,...in->...k", ginv, ginv, B, nd.nabla_H)
    trace_A_nabla = _tangent_vector(coords, E)
    c = patch.curvature
    normal_eq = -nd.normal_lap_H - trace_BAH + m * c * H
    tangent_eq = 2 * trace_A_nabla + 0.5 * m * nd.grad_H2
    return {"nd": nd, "trace_BAH": trace_BAH, "trace_A_nabla": trace_A_nabla,
            "normal": normal_eq, "tangent": tangent_eq, "h_H": h_H}


def residual_general(patch: geo.ImmersionPatch, sample_points=None,
                     scheme: Optional[FdScheme] = DEFAULT_SCHEME, tol: float = DEFAULT_TOL) -> ResidualReport:
    """Normal and tangent parts of the biharmonic system in a sphere, any codimension."""
    if patch.radius is None:
        raise ValueError("residual_general needs a spherical ambient")
    pts = patch.sample_points() if sample_points is None else sample_points

    def kernel(p):
        t = general_terms(patch, p, scheme)
        res = np.stack([_norm(t["normal"]), _norm(t["tangent"])], axis=-1)
        return res, patch.dim * _norm(t["nd"].H), {}

    return _run(patch, pts, kernel, ["normal", "tangent"], tol)


def residual_hypersurface(patch: geo.ImmersionPatch, sample_points=None,
                          scheme: Optional[FdScheme] = DEFAULT_SCHEME, tol: float = DEFAULT_TOL) -> ResidualReport:
    """Hypersurface form: Delta^perp H - (mc - |A|^2) H = 0 and 2 A(grad f) + m f grad f = 0.

    ``f`` is the signed mean curvature (H = f eta).  The extras record |A|^2
    and, for CMC patches, the reduced condition |A|^2 - mc.
    """
    if patch.codimension != 1:
        raise geo.UnsupportedError(f"{patch.name} has codimension {patch.codimension}, not 1")
    pts = patch.sample_points() if sample_points is None else sample_points
    m, c = patch.dim, patch.curvature

    def kernel(p):
        nd = geo.normal_data(patch, p, scheme)
        loc = nd.loc
        ginv, E = loc.ginv.value, loc.E.value
        eta = geo.hypersurface_normal(patch, loc)
        f = np.einsum("...n,...n->...", nd.H, eta)
        A2 = geo.squared_norm_B(loc)
        first = nd.normal_lap_H - ((m * c - A2) * f)[..., None] * eta
        df = np.einsum("...jn,...n->...j", nd.dH, eta)
        grad_f = np.einsum("...ij,...j->...i", ginv, df)
        h = np.einsum("...ijn,...n->...ij", loc.B.value, eta)
        A_grad = np.einsum("...kj,...ji,...i->...k", ginv, h, grad_f)
        second = _tangent_vector(2 * A_grad + m * f[..., None] * grad_f, E)
        res = np.stack([_norm(first), _norm(second)], axis=-1)
        cmc = float(np.ptp(np.abs(f))) if f.size > 1 else 0.0
        extras = {"A_squared_max": float(A2.max()), "A_squared_min": float(A2.min()),
                  "A_squared_minus_mc": float(np.max(np.abs(A2 - m * c))),
                  "mean_curvature_spread": cmc}
        return res, m * np.abs(f), extras

    report = _run(patch, pts, kernel, ["first", "second"], tol)
    report.extras["cmc"] = report.extras.get("mean_curvature_spread", math.inf) <= tol
    return report


def bitension_report(patch: geo.ImmersionPatch, sample_points=None,
                     scheme: Optional[FdScheme] = DEFAULT_SCHEME, tol: float = DEFAULT_TOL,
                     rescale: bool = True) -> ResidualReport:
    """Verdict from |tau2| <= tol alone (the composition route)."""
    pts = patch.sample_points() if sample_points is None else sample_points
    unit, R = _unit(patch, rescale)

    def kernel(p):
        tau2 = bitension_sphere(patch, p, scheme, rescale=rescale)
        phi = patch.evaluate(p)
        tangency = np.abs(np.einsum("...n,...n->...", tau2, phi))
        return (np.stack([_norm(tau2)], axis=-1), _norm(tension(patch, p)),
                {"tangency": float(tangency.max())})

    return _run(patch, pts, kernel, ["tau2"], tol)


# ---------------------------------------------------------------------------
# identities


@dataclass
class IdentityReport:
    residual: float  # max |m|H|^2 - |A_H|^2 - |nabla^perp H|^2|
    slack: float  # min of sum(l^2) - (sum l)^2 / m, non-negative by Cauchy-Schwarz
    mH2: np.ndarray
    A_H2: np.ndarray
    nablaH2: np.ndarray
    tol: float

    @property
    def holds(self) -> bool:
        return self.residual <= self.tol and self.slack >= -self.tol


def _A_H_eigenvalues(loc: geo.Local, H: np.ndarray) -> np.ndarray:
    h_H = np.einsum("...ijn,...n->...ij", loc.B.value, H)
    g = loc.g.value
    flat_h = h_H.reshape((-1,) + h_H.shape[-2:])
    flat_g = g.reshape((-1,) + g.shape[-2:])
    vals = np.array([eigh(a, b, eigvals_only=True) for a, b in zip(flat_h, flat_g)])
    return vals.reshape(h_H.shape[:-1])


def _nabla_sq(nd: geo.NormalData) -> np.ndarray:
    return np.einsum("...ij,...in,...jn->...", nd.loc.ginv.value, nd.nabla_H, nd.nabla_H)


def identity_cmc(patch: geo.ImmersionPatch, sample_points=None,
                 scheme: Optional[FdScheme] = DEFAULT_SCHEME, tol: float = DEFAULT_TOL) -> IdentityReport:
    """Check m|H|^2 = |A_H|^2 + |nabla^perp H|^2 and the eigenvalue Cauchy-Schwarz slack."""
    pts = sort_points(patch.sample_points() if sample_points is None else sample_points)
    m = patch.dim
    nd = geo.normal_data(patch, pts, scheme)
    lam = _A_H_eigenvalues(nd.loc, nd.H)
    mH2 = m * np.einsum("...n,...n->...", nd.H, nd.H)
    A_H2 = np.sum(lam**2, axis=-1)
    n2 = _nabla_sq(nd)
    slack = A_H2 - np.sum(lam, axis=-1) ** 2 / m
    return IdentityReport(float(np.max(np.abs(mH2 - A_H2 - n2))), float(np.min(slack)),
                          mH2, A_H2, n2, tol)


@dataclass
class PseudoUmbilicalReport:
    is_pu: bool
    lambda_values: np.ndarray  # (P, m) eigenvalues of A_H
    deviation: float  # max ||A_H - |H|^2 id|| in an orthonormal frame
    second_residual: Optional[float]  # trace A_{nabla H} - (2-m)/2 grad|H|^2, pseudo-umbilical only

    def __iter__(self):
        return iter((self.is_pu, self.lambda_values, self.second_residual))


def pseudo_umbilical_check(patch: geo.ImmersionPatch, sample_points=None,
                           scheme: Optional[FdScheme] = DEFAULT_SCHEME, tol: float = DEFAULT_TOL
                           ) -> PseudoUmbilicalReport:
    pts = sort_points(patch.sample_points() if sample_points is None else sample_points)
    m = patch.dim
    t = general_terms(patch, pts, scheme)
    nd = t["nd"]
    g = nd.loc.g.value
    H2 = np.einsum("...n,...n->...", nd.H, nd.H)
    A_frame = geo.coordinate_to_frame(t["h_H"], g)
    dev = np.linalg.norm(A_frame - H2[..., None, None] * np.eye(m), axis=(-2, -1))
    is_pu = bool(np.max(dev) <= tol)
    lam = _A_H_eigenvalues(nd.loc, nd.H)
    second = None
    if is_pu:
        second = float(np.max(_norm(t["trace_A_nabla"] - 0.5 * (2 - m) * nd.grad_H2)))
    return PseudoUmbilicalReport(is_pu, lam, float(np.max(dev)), second)


def max_normal_derivative(patch: geo.ImmersionPatch, sample_points=None,
                          scheme: Optional[FdScheme] = DEFAULT_SCHEME) -> float:
    """max over points and unit tangent X of |nabla^perp_X H|."""
    pts = sort_points(patch.sample_points() if sample_points is None else sample_points)
    nd = geo.normal_data(patch, pts, scheme)
    gram = np.einsum("...in,...jn->...ij", nd.nabla_H, nd.nabla_H)
    g = nd.loc.g.value.reshape((-1,) + gram.shape[-2:])
    top = [eigh(a, b, eigvals_only=True)[-1] for a, b in zip(gram.reshape(g.shape), g)]
    return float(np.sqrt(max(0.0, max(top))))


def parallel_mean_curvature_check(patch: geo.ImmersionPatch, sample_points=None,
                                  scheme: Optional[FdScheme] = DEFAULT_SCHEME, tol: float = DEFAULT_TOL) -> bool:
    return max_normal_derivative(patch, sample_points, scheme) <= tol


# ---------------------------------------------------------------------------
# composition through a small hypersphere


@dataclass
class CompositionReport:
    a: float
    tau_residual: float
    tau2_residual: float
    tau_j_sq: np.ndarray
    tau_j_sq_required: float
    tau_phi_sq: np.ndarray
    verdict: str

    @property
    def tau_j_sq_error(self) -> float:
        return float(np.max(np.abs(self.tau_j_sq - self.tau_j_sq_required)))


def small_sphere_normal(x: np.ndarray, a: float) -> np.ndarray:
    """Unit normal of S^{m+1}(a) at height sqrt(1-a^2) inside S^{m+2}, at x in R^{m+2}."""
    c = a / math.sqrt(1.0 - a * a)
    last = np.full(x.shape[:-1] + (1,), -a * a / math.sqrt(1.0 - a * a))
    return np.concatenate([x, last], axis=-1) / c


def composition_codim2(inner: geo.ImmersionPatch, a: float, sample_points=None,
                       scheme: Optional[FdScheme] = DEFAULT_SCHEME, tol: float = DEFAULT_TOL
                       ) -> CompositionReport:
    """Compare tau and tau2 of phi = i o j computed directly in S^{m+2} with the
    expressions through j: M -> S^{m+1}(a).

        tau(phi)  = tau(j) - (m/c) eta
        tau2(phi) = tau2(j) - (2m/c^2) tau(j) + (1/c)(|tau(j)|^2 - (m^2/c^2)(c^2 - 1)) eta

    with c^2 = a^2/(1 - a^2).
    """
    from .catalog import embed_in_sphere

    if not 0.0 < a < 1.0:
        raise EmbeddingError("a must lie in (0, 1)")
    if inner.radius is None or abs(inner.radius - a) > 1e-12:
        raise EmbeddingError(f"{inner.name} is not declared in a sphere of radius {a:g}")
    pts = sort_points(inner.sample_points() if sample_points is None else sample_points)
    x = inner.evaluate(pts)
    if np.max(np.abs(_norm(x) - a)) > 1e-10:
        raise EmbeddingError(f"{inner.name}: image leaves S(a)")
    m = inner.dim
    c2 = a * a / (1.0 - a * a)
    c = math.sqrt(c2)
    outer = embed_in_sphere(inner, math.sqrt(1.0 - a * a))
    eta = small_sphere_normal(x, a)
    pad = lambda v: np.concatenate([v, np.zeros(v.shape[:-1] + (1,))], axis=-1)

    tau_j = pad(tension(inner, pts))
    tau2_j = pad(bitension_sphere(inner, pts, scheme, rescale=True))
    tau_phi = tension(outer, pts)
    tau2_phi = bitension_sphere(outer, pts, scheme)
    tj2 = np.einsum("...n,...n->...", tau_j, tau_j)
    rhs_tau = tau_j - (m / c) * eta
    rhs_tau2 = (tau2_j - (2 * m / c2) * tau_j
                + ((tj2 - (m * m / c2) * (c2 - 1.0)) / c)[..., None] * eta)
    verdict = residual_general(outer, pts, scheme, tol).verdict
    return CompositionReport(
        a=a, tau_residual=float(np.max(_norm(tau_phi - rhs_tau))),
        tau2_residual=float(np.max(_norm(tau2_phi - rhs_tau2))),
        tau_j_sq=tj2, tau_j_sq_required=m * m * (2 * a * a - 1.0) / (a * a),
        tau_phi_sq=np.einsum("...n,...n->...", tau_phi, tau_phi), verdict=verdict)
