"""Truncated multivariate Taylor series (jets) and a finite-difference oracle.

A :class:`Jet` stores the Taylor coefficients ``c_alpha = d^alpha f / alpha!``
of a quantity at a base point, for every multi-index ``alpha`` of total degree
at most ``order``.  The leading axis of ``coeffs`` runs over multi-indices in
graded order; any trailing axes (the "tail") hold batch points and/or vector
or matrix components and broadcast like numpy arrays.

Maps are plain callables over a list of coordinates built from the elementary
functions in this module (``sin``, ``cos``, ``sqrt``, ``exp``, ``reciprocal``)
and arithmetic.  The same callable evaluates on numpy arrays or on jets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

MAX_ORDER = 4


class DomainError(ValueError):
    """A point or stencil leaves the non-periodic part of a chart domain."""


class UnsupportedOrderError(ValueError):
    pass


# ---------------------------------------------------------------------------
# multi-index bookkeeping


@lru_cache(maxsize=None)
def multi_indices(nvars: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of total degree <= order, graded then lexicographic."""
    out = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            alpha = [0] * nvars
            for i in combo:
                alpha[i] += 1
            out.append(tuple(alpha))
    # combinations_with_replacement yields (0,0),(0,1),(1,1) -> (2,0),(1,1),(0,2)
    return tuple(out)


@dataclass(frozen=True)
class _Layout:
    nvars: int
    order: int
    index: dict
    factorials: np.ndarray
    # product tables: coeff[K] += a[I] * b[J]
    pair_i: np.ndarray
    pair_j: np.ndarray
    scatter: np.ndarray  # (ncoef, npairs) 0/1 matrix
    # differentiation tables, one per variable
    diff_src: tuple
    diff_scale: tuple

    @property
    def ncoef(self) -> int:
        return len(self.index)


@lru_cache(maxsize=None)
def _layout(nvars: int, order: int) -> _Layout:
    alphas = multi_indices(nvars, order)
    index = {a: k for k, a in enumerate(alphas)}
    facts = np.array([math.prod(math.factorial(x) for x in a) for a in alphas], dtype=float)
    pi, pj, pk = [], [], []
    for i, a in enumerate(alphas):
        for j, b in enumerate(alphas):
            s = tuple(x + y for x, y in zip(a, b))
            k = index.get(s)
            if k is not None:
                pi.append(i)
                pj.append(j)
                pk.append(k)
    scatter = np.zeros((len(alphas), len(pk)))
    scatter[pk, np.arange(len(pk))] = 1.0
    diff_src, diff_scale = [], []
    if order >= 1:
        lower = multi_indices(nvars, order - 1)
        for v in range(nvars):
            src, scale = [], []
            for b in lower:
                up = list(b)
                up[v] += 1
                src.append(index[tuple(up)])
                scale.append(float(up[v]))
            diff_src.append(np.array(src))
            diff_scale.append(np.array(scale))
    return _Layout(nvars, order, index, facts, np.array(pi), np.array(pj),
                   scatter, tuple(diff_src), tuple(diff_scale))


def _expand(scale: np.ndarray, ndim: int) -> np.ndarray:
    return scale.reshape(scale.shape + (1,) * ndim)


# ---------------------------------------------------------------------------
# the jet type


class Jet:
    """Truncated Taylor expansion of an array-valued quantity.

    ``coeffs`` has shape ``(ncoef, *tail)``.  Arithmetic between jets of
    different orders truncates to the smaller order.
    """

    __slots__ = ("nvars", "order", "coeffs", "base_point")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, nvars: int, order: int, coeffs, base_point=None):
        if not 0 <= order <= MAX_ORDER:
            raise UnsupportedOrderError(f"jet order {order} outside 0..{MAX_ORDER}")
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[0] != _layout(nvars, order).ncoef:
            raise ValueError("coefficient count does not match the multi-index simplex")
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs
        self.base_point = base_point

    # -- construction -------------------------------------------------------
    @classmethod
    def variables(cls, point, order: int) -> list["Jet"]:
        """Coordinate jets ``x_i = point_i + dx_i``; ``point`` is (d,) or (d, *batch)."""
        point = np.asarray(point, dtype=float)
        d = point.shape[0]
        lay = _layout(d, order)
        out = []
        for i in range(d):
            c = np.zeros((lay.ncoef,) + point.shape[1:])
            c[0] = point[i]
            if order >= 1:
                e = [0] * d
                e[i] = 1
                c[lay.index[tuple(e)]] = 1.0
            out.append(cls(d, order, c, base_point=point))
        return out

    @classmethod
    def constant(cls, value, nvars: int, order: int, base_point=None) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((_layout(nvars, order).ncoef,) + value.shape)
        c[0] = value
        return cls(nvars, order, c, base_point)

    def _new(self, coeffs, order=None) -> "Jet":
        return Jet(self.nvars, self.order if order is None else order, coeffs, self.base_point)

    # -- inspection ---------------------------------------------------------
    @property
    def tail(self) -> tuple:
        return self.coeffs.shape[1:]

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    def coefficient(self, alpha: Sequence[int]) -> np.ndarray:
        return self.coeffs[_layout(self.nvars, self.order).index[tuple(alpha)]]

    def derivative(self, alpha: Sequence[int]) -> np.ndarray:
        """Partial derivative ``d^alpha`` at the base point."""
        alpha = tuple(alpha)
        lay = _layout(self.nvars, self.order)
        if alpha not in lay.index:
            raise UnsupportedOrderError(f"multi-index {alpha} exceeds jet order {self.order}")
        k = lay.index[alpha]
        return self.coeffs[k] * lay.factorials[k]

    def derivatives(self) -> dict:
        lay = _layout(self.nvars, self.order)
        return {a: self.coeffs[k] * lay.factorials[k] for a, k in lay.index.items()}

    # -- structural ---------------------------------------------------------
    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        n = _layout(self.nvars, order).ncoef
        return self._new(self.coeffs[:n], order)

    def diff(self, var: int) -> "Jet":
        """Jet of the partial derivative along ``var``; the order drops by one."""
        if self.order == 0:
            raise UnsupportedOrderError("cannot differentiate an order-0 jet")
        lay = _layout(self.nvars, self.order)
        src = lay.diff_src[var]
        c = self.coeffs[src] * _expand(lay.diff_scale[var], self.coeffs.ndim - 1)
        return self._new(c, self.order - 1)

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return self._new(self.coeffs[(slice(None),) + key])

    def sum(self, axis) -> "Jet":
        axis = axis if isinstance(axis, tuple) else (axis,)
        axis = tuple(a if a < 0 else a + 1 for a in axis)
        return self._new(self.coeffs.sum(axis=axis))

    def swapaxes(self, a: int, b: int) -> "Jet":
        a = a if a < 0 else a + 1
        b = b if b < 0 else b + 1
        return self._new(np.swapaxes(self.coeffs, a, b))

    @staticmethod
    def stack(items: Sequence, axis: int = -1) -> "Jet":
        jets = [x for x in items if isinstance(x, Jet)]
        if not jets:
            raise TypeError("stack needs at least one jet")
        ref = jets[0]
        order = min(j.order for j in jets)
        tail = np.broadcast_shapes(*(j.tail for j in jets))
        parts = []
        for x in items:
            x = as_jet(x, ref.nvars, order).truncate(order)
            c = x.coeffs.reshape(x.coeffs.shape[:1] + (1,) * (len(tail) - len(x.tail)) + x.tail)
            parts.append(np.broadcast_to(c, c.shape[:1] + tail))
        ax = axis if axis < 0 else axis + 1
        return Jet(ref.nvars, order, np.stack(parts, axis=ax), ref.base_point)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable counts")
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order), order
        return self, None, self.order

    def __add__(self, other):
        a, b, order = self._coerce(other)
        if b is None:
            other = np.asarray(other, dtype=float)
            tail = np.broadcast_shapes(a.tail, other.shape)
            c = np.broadcast_to(a.coeffs, a.coeffs.shape[:1] + tail).copy()
            c[0] += other
            return a._new(c, order)
        return a._new(a.coeffs + b.coeffs, order)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b, order = self._coerce(other)
        if b is None:
            return a._new(a.coeffs * np.asarray(other, dtype=float), order)
        if order == 0:
            return a._new(a.coeffs * b.coeffs, order)
        lay = _layout(self.nvars, order)
        prod = a.coeffs[lay.pair_i] * b.coeffs[lay.pair_j]
        tail = prod.shape[1:]
        c = (lay.scatter @ prod.reshape(prod.shape[0], -1)).reshape((lay.ncoef,) + tail)
        return a._new(c, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        return self._new(self.coeffs / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return power(self, n)
        out = Jet.constant(np.ones(self.tail), self.nvars, self.order, self.base_point)
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, tail={self.tail})"


def as_jet(x, nvars: int, order: int) -> Jet:
    if isinstance(x, Jet):
        return x
    return Jet.constant(x, nvars, order)


# ---------------------------------------------------------------------------
# elementary functions (dispatch on Jet vs array)


def _compose(u: Jet, derivs: list) -> Jet:
    """f(u) from f, f', ..., f^(K) evaluated at u's constant term."""
    K = u.order
    delta = u._new(u.coeffs.copy())
    delta.coeffs[0] = 0.0
    out = u._new(np.zeros_like(u.coeffs))
    out.coeffs[0] = derivs[0]
    power_ = None
    for n in range(1, K + 1):
        power_ = delta if power_ is None else power_ * delta
        out = out + power_ * (derivs[n] / math.factorial(n))
    return out


def sin(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.value), np.cos(x.value)
        return _compose(x, [s, c, -s, -c, s][: x.order + 1])
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.value), np.cos(x.value)
        return _compose(x, [c, -s, -c, s, c][: x.order + 1])
    return np.cos(x)


def exp(x):
    if isinstance(x, Jet):
        e = np.exp(x.value)
        return _compose(x, [e] * (x.order + 1))
    return np.exp(x)


def power(x, p: float):
    """x**p for real p; the base must stay positive for non-integer p."""
    if isinstance(x, Jet):
        v = np.asarray(x.value, dtype=float)
        if float(p) != int(p) and np.any(v <= 0):
            raise DomainError(f"non-integer power {p} of a non-positive base")
        if p < 0 and np.any(v == 0):
            raise DomainError("negative power of zero")
        derivs = []
        coef = 1.0
        for n in range(x.order + 1):
            derivs.append(coef * v ** (p - n))
            coef *= p - n
        return _compose(x, derivs)
    return np.asarray(x, dtype=float) ** p


def sqrt(x):
    if isinstance(x, Jet):
        return power(x, 0.5)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("square root of a negative number")
    return np.sqrt(x)


def reciprocal(x):
    if isinstance(x, Jet):
        return power(x, -1.0)
    return 1.0 / np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# jet linear algebra over the last two tail axes


def matmul(a, b):
    """Matrix product over the last two tail axes; either side may be an array."""
    if isinstance(a, Jet):
        return (a[..., :, :, None] * (b[..., None, :, :] if isinstance(b, Jet)
                                      else np.asarray(b)[..., None, :, :])).sum(-2)
    return (np.asarray(a)[..., :, :, None] * b[..., None, :, :]).sum(-2)


def matvec(a, v):
    if isinstance(a, Jet):
        return (a * (v[..., None, :] if isinstance(v, Jet) else np.asarray(v)[..., None, :])).sum(-1)
    return (np.asarray(a) * v[..., None, :]).sum(-1)


def dot(a, b):
    return (a * b).sum(-1)


def inverse(a: Jet) -> Jet:
    """Inverse of a jet-valued square matrix.

    Writes ``a = a0 (I + n)`` with ``n`` nilpotent in the truncated algebra, so
    the Neumann series terminates after ``order`` terms.
    """
    a0inv = np.linalg.inv(a.value)
    nil = a._new(a.coeffs.copy())
    nil.coeffs[0] = 0.0
    x = matmul(a0inv, nil)  # a0^-1 * (a - a0)
    out = Jet.constant(np.broadcast_to(np.eye(a.tail[-1]), a.tail), a.nvars, a.order, a.base_point)
    term = out
    for _ in range(a.order):
        term = -matmul(term, x)
        out = out + term
    return matmul(out, a0inv)


# ---------------------------------------------------------------------------
# evaluating maps


def _to_array(items, like_shape) -> np.ndarray:
    return np.stack([np.broadcast_to(np.asarray(x, dtype=float), like_shape) for x in items], axis=-1)


def evaluate(f: Callable, points) -> np.ndarray:
    """Plain evaluation of a map at points of shape (d,) or (*batch, d)."""
    points = np.asarray(points, dtype=float)
    coords = [points[..., i] for i in range(points.shape[-1])]
    return _to_array(f(coords), points.shape[:-1])


def jet_eval(f, point, order: int) -> Jet:
    """Order-``order`` Taylor data of every output coordinate of ``f`` at ``point``.

    ``f`` is either a bare map callable or an object exposing ``map`` and
    ``wrap``/``check_point`` (an immersion patch).  ``point`` may carry batch
    axes in front: shape (d,) or (*batch, d).  The result has tail
    ``(*batch, N)``.
    """
    if order > MAX_ORDER:
        raise UnsupportedOrderError(f"jet order {order} > {MAX_ORDER}")
    point = np.asarray(point, dtype=float)
    fn = f
    if hasattr(f, "map"):
        f.check_point(point)
        point = f.wrap(point)
        fn = f.map
    xs = Jet.variables(np.moveaxis(point, -1, 0), order)
    out = fn(xs)
    jet = Jet.stack([as_jet(o, point.shape[-1], order) for o in out], axis=-1)
    batch = point.shape[:-1]
    if jet.tail[:-1] != batch:
        jet = jet._new(np.broadcast_to(jet.coeffs, jet.coeffs.shape[:1] + batch + jet.tail[-1:]).copy())
    jet.base_point = point
    return jet


# ---------------------------------------------------------------------------
# finite differences


@dataclass(frozen=True)
class FdScheme:
    """Central finite differences; ``richardson`` adds one extrapolation level
    combining steps ``h`` and ``2h``."""

    step: float = 1e-3
    stencil_order: int = 4
    richardson: bool = True

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.stencil_order not in (2, 4):
            raise ValueError("stencil_order must be 2 or 4")

    def halved(self) -> "FdScheme":
        return FdScheme(self.step / 2, self.stencil_order, self.richardson)


@lru_cache(maxsize=None)
def central_weights(deriv: int, accuracy: int) -> tuple[tuple[int, Fraction], ...]:
    """Exact weights of the centred stencil for ``d^deriv`` with unit spacing."""
    r = (deriv + 1) // 2 - 1 + accuracy // 2
    if deriv == 0:
        return ((0, Fraction(1)),)
    offsets = list(range(-r, r + 1))
    n = len(offsets)
    # solve sum_k w_k k^j = j! delta_{j,deriv}
    mat = [[Fraction(k) ** j for k in offsets] for j in range(n)]
    rhs = [Fraction(math.factorial(deriv)) if j == deriv else Fraction(0) for j in range(n)]
    for col in range(n):
        piv = next(r_ for r_ in range(col, n) if mat[r_][col] != 0)
        mat[col], mat[piv] = mat[piv], mat[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        for r_ in range(n):
            if r_ != col and mat[r_][col] != 0:
                fac = mat[r_][col] / mat[col][col]
                mat[r_] = [x - fac * y for x, y in zip(mat[r_], mat[col])]
                rhs[r_] -= fac * rhs[col]
    w = [rhs[i] / mat[i][i] for i in range(n)]
    return tuple((k, wk) for k, wk in zip(offsets, w) if wk != 0)


def stencil_reach(alpha: Sequence[int], scheme: FdScheme) -> np.ndarray:
    """Largest offset (in parameter units) used along each direction."""
    mult = 2.0 if scheme.richardson else 1.0
    return np.array([max(abs(k) for k, _ in central_weights(a, scheme.stencil_order)) * scheme.step * mult
                     if a else 0.0 for a in alpha])


def _stencil(alphas: Sequence[tuple], scheme: FdScheme):
    """Union of offsets and a weight matrix (len(alphas), n_offsets)."""
    levels = [(scheme.step, 1.0)]
    if scheme.richardson:
        f = 2.0 ** scheme.stencil_order
        levels = [(scheme.step, f / (f - 1)), (2 * scheme.step, -1 / (f - 1))]
    rows = []
    offsets: dict = {}
    for alpha in alphas:
        row: dict = {}
        for h, lw in levels:
            per_dir = [central_weights(a, scheme.stencil_order) for a in alpha]
            scale = lw / h ** sum(alpha)
            for combo in itertools.product(*per_dir):
                key = tuple(round(k * h / scheme.step) for k, _ in combo)
                w = scale * math.prod(float(wk) for _, wk in combo)
                row[key] = row.get(key, 0.0) + w
        rows.append(row)
        for key in row:
            offsets.setdefault(key, len(offsets))
    weights = np.zeros((len(alphas), len(offsets)))
    for r, row in enumerate(rows):
        for key, w in row.items():
            weights[r, offsets[key]] = w
    offs = np.array(list(offsets.keys()), dtype=float) * scheme.step
    return offs, weights


def fd_partials(fn: Callable, point, alphas: Sequence[tuple], scheme: FdScheme,
                domain=None) -> np.ndarray:
    """Finite-difference estimates of several partials of a point function.

    ``fn`` maps an array of points (*batch, d) to values (*batch, *out).
    ``point`` is (d,) or (P, d).  Returns (len(alphas), *point_batch, *out).
    ``domain`` (a patch) is used to reject stencils leaving a non-periodic box.
    """
    point = np.asarray(point, dtype=float)
    offs, weights = _stencil([tuple(a) for a in alphas], scheme)
    if domain is not None:
        reach = np.max(np.abs(offs), axis=0)
        domain.check_point(point, margin=reach)
    pts = point[..., None, :] + offs  # (*batch, S, d)
    vals = np.asarray(fn(pts))
    nb = point.ndim - 1
    vals = np.moveaxis(vals, nb, 0)  # (S, *batch, *out)
    return np.tensordot(weights, vals, axes=(1, 0))


def fd_derivative(f, point, multi_index: Sequence[int], scheme: FdScheme = FdScheme()) -> np.ndarray:
    """Central-difference estimate of ``d^multi_index f`` at ``point``.

    ``f`` is a map callable or a patch; the result has one entry per output
    coordinate (a scalar map gives a length-1 array).
    """
    multi_index = tuple(multi_index)
    if sum(multi_index) > MAX_ORDER:
        raise UnsupportedOrderError("finite differences limited to total order 4")
    if hasattr(f, "map"):
        fn, domain = f.map, f
    else:
        fn, domain = f, None
    return fd_partials(lambda p: evaluate(fn, p), point, [multi_index], scheme, domain)[0]


def fd_jet(fn: Callable, point, order: int, scheme: FdScheme, domain=None) -> Jet:
    """Build a jet of a point function purely from finite differences."""
    point = np.asarray(point, dtype=float)
    d = point.shape[-1]
    lay = _layout(d, order)
    alphas = multi_indices(d, order)
    derivs = fd_partials(fn, point, alphas, scheme, domain)
    coeffs = derivs / _expand(lay.factorials, derivs.ndim - 1)
    return Jet(d, order, coeffs, base_point=point)
