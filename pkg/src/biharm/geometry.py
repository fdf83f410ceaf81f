"""Pointwise intrinsic and extrinsic geometry of immersion patches.

Sign conventions: the Laplace-Beltrami operator is ``-div grad`` (non-negative
spectrum) and the normal Laplacian is ``-trace (nabla^perp)^2``.  The second
fundamental form is ``B(X, Y) = (D_X Y)^perp`` and the Weingarten operator is
fixed by ``<A_xi X, Y> = <B(X, Y), xi>``.

Every function accepts a single parameter point of shape ``(m,)`` or a batch
``(P, m)`` and returns arrays with the same leading batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh

from . import jetcalc as jc
from .jetcalc import DomainError, FdScheme, Jet

RANK_TOL = 1e-10
SPHERE_TOL = 1e-12
PIVOT_TOL = 1e-10
MULTIPLICITY_TOL = 1e-8


class DegenerateImmersionError(ValueError):
    pass


class FrameError(ValueError):
    pass


class UnsupportedError(ValueError):
    pass


@dataclass(frozen=True)
class ImmersionPatch:
    """A chart ``map`` from a parameter box into R^N.

    ``radius`` is the declared radius of the round ambient sphere centred at
    the origin, or ``None`` for a flat ambient R^N.
    """

    name: str
    dim: int
    ambient_dim: int
    lower: tuple
    upper: tuple
    periodic: tuple
    map: Callable = field(repr=False, compare=False)
    radius: Optional[float] = 1.0
    params: dict = field(default_factory=dict, compare=False)

    @property
    def period(self) -> np.ndarray:
        return np.asarray(self.upper, float) - np.asarray(self.lower, float)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lower, float) + np.asarray(self.upper, float))

    @property
    def codimension(self) -> int:
        return self.ambient_dim - self.dim - (0 if self.radius is None else 1)

    @property
    def curvature(self) -> float:
        return 0.0 if self.radius is None else 1.0 / self.radius**2

    @property
    def fully_periodic(self) -> bool:
        return all(self.periodic)

    def wrap(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        lo = np.asarray(self.lower, float)
        per = self.period
        mask = np.asarray(self.periodic, bool)
        wrapped = lo + np.mod(points - lo, per)
        return np.where(mask, wrapped, points)

    def check_point(self, points, margin=0.0) -> None:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} parameters, got {points.shape[-1]}")
        margin = np.broadcast_to(np.asarray(margin, float), (self.dim,))
        lo = np.asarray(self.lower, float) + margin - 1e-12
        hi = np.asarray(self.upper, float) - margin + 1e-12
        for i in range(self.dim):
            if self.periodic[i]:
                continue
            c = points[..., i]
            if np.any(c < lo[i]) or np.any(c > hi[i]):
                raise DomainError(f"{self.name}: parameter {i} leaves [{self.lower[i]}, {self.upper[i]}]"
                                  f" (margin {margin[i]:g})")

    def evaluate(self, points) -> np.ndarray:
        self.check_point(points)
        return jc.evaluate(self.map, self.wrap(points))

    def jet(self, points, order: int) -> Jet:
        return jc.jet_eval(self, points, order)

    def sample_points(self, n: int = 5) -> np.ndarray:
        """Interior tensor grid with ``n`` points per direction, shape (n**m, m)."""
        axes = []
        for lo, hi in zip(self.lower, self.upper):
            axes.append(lo + (np.arange(n) + 0.5) * (hi - lo) / n)
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=-1)

    def scaled(self, factor: float, name: Optional[str] = None) -> "ImmersionPatch":
        """Homothetic copy ``factor * phi`` (ambient radius scaled accordingly)."""
        f = self.map
        return replace(self, name=name or f"{self.name}*{factor:g}",
                       map=lambda x: [factor * c for c in f(x)],
                       radius=None if self.radius is None else self.radius * factor)

    def flat_view(self) -> "ImmersionPatch":
        """Same map regarded as an immersion into flat R^N."""
        return replace(self, radius=None)


def validate_patch(patch: ImmersionPatch, points=None) -> None:
    """Full rank and on-sphere checks at sample points."""
    points = patch.sample_points() if points is None else np.asarray(points, float)
    jet = patch.jet(points, 1)
    E = np.stack([jet.derivative(e) for e in np.eye(patch.dim, dtype=int)], axis=-2)
    gram = np.linalg.det(E @ np.swapaxes(E, -1, -2))
    if np.any(gram <= RANK_TOL):
        raise DegenerateImmersionError(f"{patch.name}: rank-deficient differential")
    if patch.radius is not None:
        err = np.abs(np.linalg.norm(jet.value, axis=-1) - patch.radius)
        if np.any(err > SPHERE_TOL):
            raise ValueError(f"{patch.name}: image leaves the sphere of radius {patch.radius}"
                             f" (max error {err.max():.2e})")


# ---------------------------------------------------------------------------
# local jets


@dataclass
class Local:
    """Jets of the basic extrinsic quantities derived from an order-K jet of phi.

    Orders: ``phi``, ``E``, ``g``, ``ginv`` carry K-1; ``hess``, ``B``, ``H``
    carry K-2.  Tails: E (.., m, N), g (.., m, m), hess/B (.., m, m, N).
    """

    m: int
    radius: Optional[float]
    phi: Jet
    E: Jet
    g: Jet
    ginv: Jet
    hess: Jet
    B: Jet
    H: Jet

    def normal_part(self, v):
        return normal_part(v, self.E, self.ginv, self.phi, self.radius)


def normal_part(v, E, ginv, phi, radius):
    """Projection onto the normal space of M inside the ambient sphere (or R^N)."""
    coords = jc.matvec(ginv, jc.matvec(E, v))  # (.., m)
    tang = (E * coords[..., :, None]).sum(-2)
    out = v - tang
    if radius is not None:
        out = out - phi * (jc.dot(phi, v) / radius**2)[..., None]
    return out


def local_jets(phi: Jet, m: int, radius: Optional[float]) -> Local:
    if phi.order < 2:
        raise jc.UnsupportedOrderError("need a jet of order >= 2")
    E = Jet.stack([phi.diff(i) for i in range(m)], axis=-2)
    g = (E[..., :, None, :] * E[..., None, :, :]).sum(-1)
    if np.any(np.linalg.det(g.value) <= RANK_TOL):
        raise DegenerateImmersionError("degenerate metric: differential is not of full rank")
    ginv = jc.inverse(g)
    hess = Jet.stack([Jet.stack([phi.diff(i).diff(j) for j in range(m)], axis=-2) for i in range(m)], axis=-3)
    phi1 = phi.truncate(phi.order - 1)
    B = normal_part(hess, _bcast(E, 2), _bcast(ginv, 2), phi1[..., None, None, :], radius)
    H = (ginv[..., None] * B).sum((-3, -2)) / m
    return Local(m, radius, phi1, E, g, ginv, hess, B, H)


def _bcast(j: Jet, n: int) -> Jet:
    idx = (Ellipsis,) + (None,) * n + (slice(None), slice(None))
    return j[idx]


def local_at(patch: ImmersionPatch, points, order: int = 2) -> Local:
    return local_jets(patch.jet(points, order), patch.dim, patch.radius)


def christoffel_from_metric(g: Jet) -> np.ndarray:
    """Gamma^k_ij from first partials of the metric jet; shape (.., k, i, j)."""
    m = g.tail[-1]
    dg = np.stack([g.diff(l).value for l in range(m)], axis=-3)  # dg[.., a, i, j] = d_a g_ij
    lowered = 0.5 * (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg)
    return np.einsum("...kl,...lij->...kij", np.linalg.inv(g.value), lowered)


# ---------------------------------------------------------------------------
# data holders


@dataclass
class MetricData:
    g: np.ndarray
    g_inv: np.ndarray
    sqrt_det: np.ndarray
    christoffel: np.ndarray  # (.., k, i, j)
    g_derivs: np.ndarray  # (.., l, i, j) = d_l g_ij


@dataclass
class ShapeData:
    normal_frame: np.ndarray  # (.., codim, N)
    B: np.ndarray  # (.., m, m, N)
    H: np.ndarray  # (.., N)
    A: np.ndarray  # (.., codim, m, m), coordinate matrix A^k_i of each frame vector
    A_H: np.ndarray  # (.., m, m)
    f: Optional[np.ndarray] = None
    eta: Optional[np.ndarray] = None


def first_fundamental(patch: ImmersionPatch, point) -> MetricData:
    loc = local_at(patch, point, 2)
    g = loc.g.value
    det = np.linalg.det(g)
    if np.any(det <= RANK_TOL):
        raise DegenerateImmersionError(f"{patch.name}: degenerate metric")
    m = patch.dim
    dg = np.stack([loc.g.diff(l).value for l in range(m)], axis=-3)
    return MetricData(g=g, g_inv=np.linalg.inv(g), sqrt_det=np.sqrt(det),
                      christoffel=christoffel_from_metric(loc.g), g_derivs=dg)


def orthonormal_metric_root(g: np.ndarray) -> np.ndarray:
    """L with L^T g L = I (columns are an orthonormal tangent frame in coordinates)."""
    chol = np.linalg.cholesky(g)
    return np.swapaxes(np.linalg.inv(chol), -1, -2)


def coordinate_to_frame(mat: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Matrix of a symmetric bilinear form in an orthonormal tangent frame."""
    L = orthonormal_metric_root(g)
    return np.swapaxes(L, -1, -2) @ mat @ L


def _gram_schmidt_normals(loc: Local, codim: int) -> np.ndarray:
    N = loc.phi.tail[-1]
    E = loc.E.value
    ginv = loc.ginv.value
    phi = loc.phi.value
    batch = E.shape[:-2]
    frames = np.zeros(batch + (codim, N))
    for idx in np.ndindex(*batch):
        axes = np.eye(N)
        proj = normal_part(axes, E[idx], ginv[idx], phi[idx], loc.radius)
        basis = []
        for v in proj:
            for b in basis:
                v = v - np.dot(v, b) * b
            nrm = np.linalg.norm(v)
            if nrm > PIVOT_TOL:
                basis.append(v / nrm)
            if len(basis) == codim:
                break
        if len(basis) < codim:
            raise FrameError("normal frame construction failed")
        frames[idx] = np.array(basis)
    return frames


def _cross_normal(E: np.ndarray, phi: Optional[np.ndarray]) -> np.ndarray:
    """Unit vector orthogonal to the rows of E (and phi) by cofactor expansion."""
    rows = E if phi is None else np.concatenate([E, phi[..., None, :]], axis=-2)
    N = rows.shape[-1]
    comps = []
    for k in range(N):
        minor = np.delete(rows, k, axis=-1)
        comps.append((-1) ** k * np.linalg.det(minor))
    v = np.stack(comps, axis=-1)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def hypersurface_normal(patch: ImmersionPatch, loc: Local) -> np.ndarray:
    """Unit normal of a hypersurface, oriented by the convention at the domain centre."""
    if patch.codimension != 1:
        raise UnsupportedError(f"{patch.name} has codimension {patch.codimension}, not 1")
    eta = _cross_normal(loc.E.value, None if patch.radius is None else loc.phi.value)
    ref_loc = local_at(patch, patch.center, 2)
    ref = _cross_normal(ref_loc.E.value, None if patch.radius is None else ref_loc.phi.value)
    first = ref[np.argmax(np.abs(ref) > 1e-12)]
    return eta * np.sign(first)


def _shape_from_local(patch: ImmersionPatch, loc: Local) -> ShapeData:
    B = loc.B.value
    H = loc.H.value
    ginv = loc.ginv.value
    codim = patch.codimension
    frame = _gram_schmidt_normals(loc, codim)
    # A_xi^k_i = g^{kj} <B_ij, xi>
    h_frame = np.einsum("...ijn,...an->...aij", B, frame)
    A = np.einsum("...kj,...aij->...aki", ginv, h_frame)
    A_H = np.einsum("...kj,...ij->...ki", ginv, np.einsum("...ijn,...n->...ij", B, H))
    f = eta = None
    if codim == 1:
        eta = hypersurface_normal(patch, loc)
        f = np.einsum("...n,...n->...", H, eta)
    return ShapeData(normal_frame=frame, B=B, H=H, A=A, A_H=A_H, f=f, eta=eta)


def second_fundamental(patch: ImmersionPatch, point) -> ShapeData:
    return _shape_from_local(patch, local_at(patch, point, 2))


def mean_curvature(patch: ImmersionPatch, point) -> np.ndarray:
    return local_at(patch, point, 2).H.value


# ---------------------------------------------------------------------------
# Laplacians


def _laplacian_from_jet(u: Jet, ginv: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """-g^{ij}(d_ij u - Gamma^k_ij d_k u) for a jet u of order >= 2 with tail (.., *out)."""
    m = ginv.shape[-1]
    extra = u.coeffs.ndim - 1 - (ginv.ndim - 2)
    grad = np.stack([u.diff(k).value for k in range(m)], axis=0)  # (k, .., *out)
    hess = np.stack([np.stack([u.diff(i).diff(j).value for j in range(m)], 0) for i in range(m)], 0)
    exp_ = (Ellipsis,) + (None,) * extra
    out = 0.0
    for i in range(m):
        for j in range(m):
            corr = sum(gamma[..., k, i, j][exp_] * grad[k] for k in range(m))
            out = out + ginv[..., i, j][exp_] * (hess[i, j] - corr)
    return -out


def field_jet(fn: Callable[[np.ndarray], np.ndarray], patch: ImmersionPatch, points,
              order: int, scheme: FdScheme) -> Jet:
    """Jet of a point function obtained by finite differences over the chart."""
    return jc.fd_jet(fn, points, order, scheme, domain=patch)


def laplace_beltrami(field: Callable, patch: ImmersionPatch, point,
                     scheme: Optional[FdScheme] = None) -> np.ndarray:
    """Laplace-Beltrami operator of a scalar or vector field on the patch.

    ``field`` is map-like (a callable over coordinate lists, usable with jets)
    or, when ``scheme`` is given, any callable accepted by :func:`jetcalc.evaluate`.
    With ``scheme=None`` the field's own jets are used; otherwise the outer
    derivatives come from finite differences.
    """
    point = np.asarray(point, float)
    loc = local_at(patch, point, 2)
    gamma = christoffel_from_metric(loc.g)
    ginv = loc.ginv.value
    if scheme is None:
        patch.check_point(point)
        u = jc.jet_eval(field, patch.wrap(point), 2)
    else:
        u = field_jet(lambda p: jc.evaluate(field, patch.wrap(p)), patch, point, 2, scheme)
    val = _laplacian_from_jet(u, ginv, gamma)
    return val


def mean_curvature_jet(patch: ImmersionPatch, points, order: int,
                       scheme: Optional[FdScheme]) -> Jet:
    """Jet of H at the points: exact (scheme None) or from FD of pointwise H values."""
    if scheme is None:
        return local_at(patch, points, order + 2).H
    return field_jet(lambda p: mean_curvature(patch, p), patch, points, order, scheme)


@dataclass
class NormalData:
    """Mean-curvature derivatives at a batch of points."""

    loc: Local
    gamma: np.ndarray
    H: np.ndarray  # (.., N)
    nabla_H: np.ndarray  # (.., m, N) normal covariant derivatives
    normal_lap_H: np.ndarray  # (.., N), non-negative convention
    grad_H2: np.ndarray  # (.., N) ambient gradient vector of |H|^2
    dH: np.ndarray  # (.., m, N) plain partials of H


def normal_data(patch: ImmersionPatch, points, scheme: Optional[FdScheme]) -> NormalData:
    points = np.asarray(points, float)
    loc = local_at(patch, points, 2)
    m = patch.dim
    gamma = christoffel_from_metric(loc.g)
    Hj = mean_curvature_jet(patch, points, 2, scheme)
    # nabla^perp_j H as order-1 jets
    W = [loc.normal_part(Hj.diff(j)) for j in range(m)]
    nabla = np.stack([w.value for w in W], axis=-2)
    E0, ginv0, phi0 = loc.E.value, loc.ginv.value, loc.phi.value
    lap = 0.0
    for i in range(m):
        for j in range(m):
            second = W[j].diff(i).value - sum(gamma[..., k, i, j][..., None] * nabla[..., k, :] for k in range(m))
            second = normal_part(second, E0, ginv0, phi0, patch.radius)
            lap = lap + ginv0[..., i, j][..., None] * second
    H0 = Hj.value
    dH = np.stack([Hj.diff(j).value for j in range(m)], axis=-2)
    d_H2 = 2.0 * np.einsum("...jn,...n->...j", dH, H0)
    grad = np.einsum("...jk,...j,...kn->...n", ginv0, d_H2, E0)
    return NormalData(loc, gamma, H0, nabla, -lap, grad, dH)


def normal_laplacian(patch: ImmersionPatch, point, scheme: Optional[FdScheme] = FdScheme()) -> np.ndarray:
    """Delta^perp H in ambient coordinates (``scheme=None``: exact jets)."""
    return normal_data(patch, point, scheme).normal_lap_H


# ---------------------------------------------------------------------------
# curvature summaries


def _merge(values: np.ndarray, tol: float = MULTIPLICITY_TOL) -> list:
    out: list = []
    for v in sorted(values):
        if out and abs(v - out[-1][0]) <= tol:
            val, mult = out[-1]
            out[-1] = ((val * mult + v) / (mult + 1), mult + 1)
        else:
            out.append((float(v), 1))
    return out


def principal_curvatures(patch: ImmersionPatch, point) -> list:
    """Eigenvalues of A_eta at a single point, merged into (value, multiplicity)."""
    if patch.codimension != 1:
        raise UnsupportedError(f"{patch.name} has codimension {patch.codimension}, not 1")
    point = np.asarray(point, float)
    if point.ndim != 1:
        raise ValueError("principal_curvatures takes a single point")
    loc = local_at(patch, point, 2)
    eta = hypersurface_normal(patch, loc)
    h = np.einsum("ijn,n->ij", loc.B.value, eta)
    vals = eigh(h, loc.g.value, eigvals_only=True)
    return _merge(vals)


def squared_norm_B(loc: Local) -> np.ndarray:
    """|B|^2 = g^{ik} g^{jl} <B_ij, B_kl>."""
    ginv = loc.ginv.value
    B = loc.B.value
    return np.einsum("...ik,...jl,...ijn,...kln->...", ginv, ginv, B, B)


def scalar_curvature(patch: ImmersionPatch, point) -> np.ndarray:
    """Gauss equation: s = m(m-1)c + m^2|H|^2 - |B|^2."""
    loc = local_at(patch, point, 2)
    m = patch.dim
    H = loc.H.value
    return m * (m - 1) * patch.curvature + m * m * np.einsum("...n,...n->...", H, H) - squared_norm_B(loc)


def quasi_umbilical_check(patch: ImmersionPatch, points) -> bool:
    m = patch.dim
    for p in np.atleast_2d(np.asarray(points, float)):
        if max(mult for _, mult in principal_curvatures(patch, p)) < m - 1:
            return False
    return True
