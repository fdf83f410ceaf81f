"""Discrete Laplace-Beltrami operators on parameter lattices and Chen-type tests.

The operator is the variable-coefficient finite-difference form

    (L u)_p = -(1 / w_p) sum_ij (D_i W_ij D_j u)_p,   W_ij = diag(sqrt(det g) g^ij vol)

with D_i a central first-difference matrix (sixth order by default).  On periodic
directions D_i is skew, so ``K = sum D_i^T W_ij D_j`` is symmetric positive
semidefinite and L is self-adjoint for the mass ``diag(w)``.

Open (non-periodic) directions are allowed when explicitly requested: rows
whose stencil leaves the lattice are zero and every result is restricted to
nodes far enough from the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import geometry as geo
from .jetcalc import central_weights

SPECTRAL_TOL = 1e-2
MIN_RESOLUTION = 16
ROOT_SEPARATION = 1e-1
REFERENCE_RESOLUTION = {1: 256, 2: 64, 3: 24}
CMC_TOL = 1e-6

DEFAULT_ACCURACY = 6


class MeshError(ValueError):
    pass


@dataclass
class PeriodicMesh:
    patch: geo.ImmersionPatch
    resolution: tuple
    spacing: np.ndarray  # (m,)
    nodes: np.ndarray  # (P, m) parameter coordinates, C order over the lattice
    weights: np.ndarray  # (P,) sqrt(det g) * cell volume (trapezoid on open directions)
    g_inv: np.ndarray  # (P, m, m)
    sqrt_det: np.ndarray  # (P,)

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    @property
    def periodic(self) -> tuple:
        return tuple(self.patch.periodic)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def interior(self, depth: int) -> np.ndarray:
        """Boolean mask of nodes at least ``depth`` lattice steps from an open boundary."""
        idx = np.indices(self.resolution).reshape(len(self.resolution), -1)
        mask = np.ones(self.size, bool)
        for d, (n, per) in enumerate(zip(self.resolution, self.periodic)):
            if not per:
                mask &= (idx[d] >= depth) & (idx[d] <= n - 1 - depth)
        return mask

    def positions(self) -> np.ndarray:
        return self.patch.evaluate(self.nodes)


def _resolution(patch: geo.ImmersionPatch, resolution) -> tuple:
    if resolution is None:
        resolution = REFERENCE_RESOLUTION.get(patch.dim, 16)
    res = tuple(int(r) for r in np.broadcast_to(np.asarray(resolution), (patch.dim,)))
    if min(res) < MIN_RESOLUTION:
        raise MeshError(f"resolution {res} below {MIN_RESOLUTION} per direction")
    return res


def build_mesh(patch: geo.ImmersionPatch, resolution=None, open_ok: bool = False) -> PeriodicMesh:
    """Uniform lattice over the parameter box with metric data from exact jets."""
    if not patch.fully_periodic and not open_ok:
        raise MeshError(f"{patch.name} is not periodic in every direction")
    res = _resolution(patch, resolution)
    axes, steps, quad = [], [], []
    for lo, hi, n, per in zip(patch.lower, patch.upper, res, patch.periodic):
        if per:
            h = (hi - lo) / n
            axes.append(lo + h * np.arange(n))
            quad.append(np.full(n, h))
        else:
            h = (hi - lo) / (n - 1)
            axes.append(lo + h * np.arange(n))
            q = np.full(n, h)
            q[[0, -1]] *= 0.5
            quad.append(q)
        steps.append(h)
    grid = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grid], axis=-1)
    vol = np.ones(())
    for q in quad:
        vol = np.multiply.outer(vol, q)
    jet = patch.jet(nodes, 1)
    E = np.stack([jet.derivative(e) for e in np.eye(patch.dim, dtype=int)], axis=-2)
    g = E @ np.swapaxes(E, -1, -2)
    det = np.linalg.det(g)
    if np.any(det <= geo.RANK_TOL):
        raise geo.DegenerateImmersionError(f"{patch.name}: degenerate metric on the mesh")
    sq = np.sqrt(det)
    return PeriodicMesh(patch, res, np.array(steps), nodes, sq * vol.ravel(), np.linalg.inv(g), sq)


def _diff_1d(n: int, h: float, periodic: bool, accuracy: int) -> sp.csr_matrix:
    stencil = [(off, float(w)) for off, w in central_weights(1, accuracy) if w != 0]
    reach = accuracy // 2
    rows, cols, vals = [], [], []
    for i in range(n):
        if not periodic and (i < reach or i > n - 1 - reach):
            continue
        for off, w in stencil:
            rows.append(i)
            cols.append((i + off) % n)
            vals.append(w / h)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _diff_matrices(mesh: PeriodicMesh, accuracy: int) -> list:
    mats = []
    res = mesh.resolution
    for d in range(len(res)):
        factors = [sp.identity(n, format="csr") for n in res]
        factors[d] = _diff_1d(res[d], mesh.spacing[d], mesh.periodic[d], accuracy)
        D = factors[0]
        for f in factors[1:]:
            D = sp.kron(D, f, format="csr")
        mats.append(D.tocsr())
    return mats


@dataclass
class DiscreteOperator:
    """L = M^-1 K on mesh functions (rows are nodes; columns may hold vector components)."""

    mesh: PeriodicMesh
    stiffness: sp.csr_matrix  # K
    mass: np.ndarray  # diag of M
    accuracy: int = DEFAULT_ACCURACY

    @property
    def reach(self) -> int:
        """Lattice steps one application of L looks in each direction."""
        return self.accuracy

    @property
    def matrix(self) -> sp.csr_matrix:
        return sp.diags(1.0 / self.mass) @ self.stiffness

    def apply(self, u: np.ndarray) -> np.ndarray:
        ku = self.stiffness @ u
        return ku / (self.mass if ku.ndim == 1 else self.mass[:, None])

    def power_apply(self, u: np.ndarray, k: int) -> list:
        out = [u]
        for _ in range(k):
            out.append(self.apply(out[-1]))
        return out


def laplacian(mesh: PeriodicMesh, accuracy: int = DEFAULT_ACCURACY) -> DiscreteOperator:
    """Discrete Laplace-Beltrami operator; ``accuracy`` is the stencil order (2, 4 or 6)."""
    if accuracy not in (2, 4, 6):
        raise ValueError("accuracy must be 2, 4 or 6")
    D = _diff_matrices(mesh, accuracy)
    m = len(D)
    coeff = mesh.g_inv * mesh.weights[:, None, None]
    K = None
    for i in range(m):
        for j in range(m):
            term = -(D[i] @ sp.diags(coeff[:, i, j]) @ D[j])
            K = term if K is None else K + term
    return DiscreteOperator(mesh, K.tocsr(), mesh.weights.copy(), accuracy)


# ---------------------------------------------------------------------------
# Chen type


def _wnorm(u: np.ndarray, w: np.ndarray) -> float:
    u2 = u * u if u.ndim == 1 else np.sum(u * u, axis=-1)
    return float(math.sqrt(np.sum(w * u2)))


def mean_curvature_flat(op: DiscreteOperator) -> tuple:
    """(H0, x): H0 = -(1/m) L x and the positions x with the centre of mass removed.

    L annihilates constants, so centring x does not change H0.
    """
    mesh = op.mesh
    x = mesh.positions()
    w = mesh.weights
    x = x - (w[:, None] * x).sum(0) / w.sum()
    H0 = -op.apply(x) / mesh.patch.dim
    return H0, x


def _krylov(op: DiscreteOperator, k: int):
    mesh = op.mesh
    H0, _ = mean_curvature_flat(op)
    # one application builds H0, k more build the powers
    w = mesh.weights * mesh.interior(op.reach * (k + 1))
    if not np.any(w > 0):
        raise MeshError(f"no nodes left after trimming {op.reach * (k + 1)} steps from open boundaries")
    return op.power_apply(H0, k), w


def minimal_polynomial_residual(mesh_or_op, roots: Sequence[float]) -> float:
    """Relative weighted norm of prod(L - r I) H0 against ||L^k H0||."""
    op = mesh_or_op if isinstance(mesh_or_op, DiscreteOperator) else laplacian(mesh_or_op)
    roots = [float(r) for r in roots]
    if any(not np.isfinite(r) or r < 0 for r in roots):
        raise ValueError("roots must be finite and non-negative")
    k = len(roots)
    powers, w = _krylov(op, k)
    v = powers[0]
    for r in roots:
        v = op.apply(v) - r * v
    return _wnorm(v, w) / _wnorm(powers[k], w)


@dataclass
class ChenTypeResult:
    k: int
    eigenvalues: list
    residual: float
    residuals: dict  # degree -> relative residual of the best monic fit
    inconclusive: bool = False
    note: str = ""

    def __iter__(self):
        return iter((self.k, self.eigenvalues, self.residual))


def _fit(powers: list, w: np.ndarray, k: int) -> tuple:
    """Least-squares monic polynomial of degree k: returns (coefficients low->high, residual)."""
    sw = np.sqrt(w)[:, None]
    cols = [(sw * p).ravel() for p in powers[:k]]
    target = (sw * powers[k]).ravel()
    A = np.stack(cols, axis=-1)
    c, *_ = np.linalg.lstsq(A, -target, rcond=None)
    res = np.linalg.norm(target + A @ c) / np.linalg.norm(target)
    return np.concatenate([c, [1.0]]), float(res)


def chen_type(mesh_or_op, max_k: int = 3, tol: float = SPECTRAL_TOL) -> ChenTypeResult:
    """Smallest k with a monic degree-k polynomial P such that P(L) H0 ~ 0."""
    if max_k not in (1, 2, 3):
        raise ValueError("max_k must be 1, 2 or 3")
    op = mesh_or_op if isinstance(mesh_or_op, DiscreteOperator) else laplacian(mesh_or_op)
    residuals = {}
    best = None
    for k in range(1, max_k + 1):
        powers, w = _krylov(op, k)
        coeffs, res = _fit(powers, w, k)
        residuals[k] = res
        if res <= tol:
            best = (k, coeffs, res)
            break
    if best is None:
        k = max_k
        return ChenTypeResult(k, [], residuals[k], residuals, True, "no degree reached tolerance")
    k, coeffs, res = best
    roots = np.roots(coeffs[::-1])
    note = ""
    inconclusive = False
    if np.max(np.abs(roots.imag)) > 1e-6 * max(1.0, np.max(np.abs(roots))):
        inconclusive, note = True, "complex roots"
    vals = sorted(float(r) for r in roots.real)
    if any(v <= 0 for v in vals):
        inconclusive, note = True, "non-positive root"
    if len(vals) > 1 and np.min(np.diff(vals)) < ROOT_SEPARATION:
        inconclusive, note = True, "roots closer than the separation threshold"
    return ChenTypeResult(k, vals, res, residuals, inconclusive, note)


# ---------------------------------------------------------------------------
# caract_bih_HH


@dataclass
class HHResult:
    residual: float  # max nodal |Delta H0 - 2m H0 + m(|H|^2 - 1) phi|
    weighted_rms: float
    mean_curvature: float


def verify_caract_bih_HH(mesh: PeriodicMesh, op: Optional[DiscreteOperator] = None,
                         cmc_tol: float = CMC_TOL) -> HHResult:
    """Residual of Delta H0 - 2m H0 + m(|H|^2 - 1) phi = 0 with H0 = H - phi.

    H is the mean curvature in the unit sphere from exact jets at the nodes;
    the Laplacian is the discrete operator.
    """
    patch = mesh.patch
    if patch.radius is None or abs(patch.radius - 1.0) > 1e-12:
        raise ValueError("needs a patch in the unit sphere")
    op = op or laplacian(mesh)
    m = patch.dim
    H = geo.mean_curvature(patch, mesh.nodes)
    h = np.linalg.norm(H, axis=-1)
    if np.ptp(h) > cmc_tol:
        raise ValueError(f"{patch.name}: mean curvature not constant (spread {np.ptp(h):.2e})")
    phi = mesh.positions()
    H0 = H - phi
    res = op.apply(H0) - 2 * m * H0 + m * (h[:, None] ** 2 - 1.0) * phi
    mask = mesh.interior(op.reach)
    nodal = np.linalg.norm(res, axis=-1)[mask]
    w = mesh.weights[mask]
    rms = float(math.sqrt(np.sum(w * nodal**2) / w.sum()))
    return HHResult(float(nodal.max()), rms, float(h.mean()))
