"""Exact rational reproduction of the algebraic steps behind the hypersurface results.

Everything here uses :class:`fractions.Fraction`; no floating point enters a
verdict.  The two-principal-curvature argument reduces to ODE relations along
an integral curve of grad f,

    first:   f f'' - 3(m-1)/(m+2) f'^2 - m^2(m+8)/(4(m-1)) f^4 + m c f^2 = 0
    second:  f f'' - (m+5)/(m+2) f'^2 + m^2(m+2)/(4(m-1)) f^4 - (m+2)/3 c f^2 = 0

whose eliminations give f'^2 twice as a polynomial in f.  Their difference D
is a polynomial in f^2 with a non-vanishing non-constant part, forcing f to
be constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

Number = Union[int, Fraction]

F_CONSTANT = "f_constant"
M4_BRANCH = "m_equals_4_branch"
INCONSISTENT = "inconsistent_input"
NONEXISTENT = "nonexistent"
NO_CONTRADICTION = "no_contradiction"
CMC_FORCED = "cmc_forced"
UNDETERMINED = "undetermined"


def _q(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("exact arithmetic only: pass int, str or Fraction")
    return Fraction(x)


@dataclass(frozen=True)
class RationalPoly:
    """Univariate polynomial with Fraction coefficients, lowest degree first.

    ``var`` names the variable ("f" or "f^2").  ``symbolic_constant`` marks an
    additional symbolic constant term (e.g. an integration constant "C").
    """

    coeffs: tuple
    var: str = "f"
    symbolic_constant: Optional[str] = None

    def __post_init__(self):
        cs = [_q(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def _check(self, other: "RationalPoly"):
        if other.var != self.var:
            raise ValueError(f"variable mismatch: {self.var} vs {other.var}")

    def __add__(self, other: "RationalPoly") -> "RationalPoly":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        sym = _combine_symbols(self.symbolic_constant, other.symbolic_constant, "+")
        return RationalPoly(tuple(self.coefficient(k) + other.coefficient(k) for k in range(n)), self.var, sym)

    def __neg__(self) -> "RationalPoly":
        sym = None if self.symbolic_constant is None else f"-({self.symbolic_constant})"
        return RationalPoly(tuple(-c for c in self.coeffs), self.var, sym)

    def __sub__(self, other: "RationalPoly") -> "RationalPoly":
        return self + (-other)

    def scale(self, s: Number) -> "RationalPoly":
        s = _q(s)
        sym = None if self.symbolic_constant is None or s == 0 else f"{s}*({self.symbolic_constant})"
        return RationalPoly(tuple(s * c for c in self.coeffs), self.var, sym)

    def in_square(self) -> "RationalPoly":
        """Rewrite an even polynomial in f as a polynomial in f^2."""
        if self.var != "f":
            raise ValueError("already in f^2")
        if any(c != 0 for c in self.coeffs[1::2]):
            raise ValueError("polynomial is not even")
        return RationalPoly(self.coeffs[0::2], "f^2", self.symbolic_constant)

    def nonconstant_nonzero(self) -> bool:
        return any(c != 0 for c in self.coeffs[1:])

    def __call__(self, x: Number) -> Fraction:
        if self.symbolic_constant is not None:
            raise ValueError(f"cannot evaluate with symbolic constant {self.symbolic_constant}")
        x = _q(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __str__(self) -> str:
        terms = []
        if self.symbolic_constant:
            terms.append(self.symbolic_constant)
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if k == 0 else (self.var if k == 1 else f"({self.var})^{k}")
            terms.append(f"{c}{'*' + mono if mono else ''}")
        return " + ".join(terms) if terms else "0"


def _combine_symbols(a, b, op):
    if a is None:
        return b
    if b is None:
        return a
    return f"{a} {op} {b}"


@dataclass(frozen=True)
class OdeRelation:
    """Linear combination of the monomials f f'', f'^2, f^4, f^2 equal to zero."""

    ffpp: Fraction
    fp2: Fraction
    f4: Fraction
    f2: Fraction

    def __add__(self, o: "OdeRelation") -> "OdeRelation":
        return OdeRelation(self.ffpp + o.ffpp, self.fp2 + o.fp2, self.f4 + o.f4, self.f2 + o.f2)

    def scale(self, s: Number) -> "OdeRelation":
        s = _q(s)
        return OdeRelation(s * self.ffpp, s * self.fp2, s * self.f4, s * self.f2)

    def constant_solution(self) -> Optional[Fraction]:
        """f^2 for a non-zero constant solution (f' = f'' = 0), if one exists."""
        if self.f4 == 0:
            return None
        return -self.f2 / self.f4


def first_fundamental(m: int, c: Number) -> OdeRelation:
    m, c = _q(m), _q(c)
    return OdeRelation(Fraction(1), -3 * (m - 1) / (m + 2), -m * m * (m + 8) / (4 * (m - 1)), m * c)


def second_fundamental(m: int, c: Number) -> OdeRelation:
    m, c = _q(m), _q(c)
    return OdeRelation(Fraction(1), -(m + 5) / (m + 2), m * m * (m + 2) / (4 * (m - 1)), -(m + 2) * c / 3)


def squared_norm_A_coefficient(m: int) -> Fraction:
    """|A|^2 = k1^2 + (m-1) k2^2 with k1 = -m f/2, k2 = 3m f/(2(m-1)), as a multiple of f^2."""
    m = _q(m)
    k1 = -m / 2
    k2 = 3 * m / (2 * (m - 1))
    return k1 * k1 + (m - 1) * k2 * k2


@dataclass
class CurvatureSystem:
    m: int
    c: Fraction
    first: OdeRelation
    second: OdeRelation
    prel_f: tuple  # (coefficient of f f'', RationalPoly right-hand side in f)
    derivata_1: Optional[RationalPoly]  # f'^2 in f, symbolic constant C
    derivata_2: Optional[RationalPoly]  # f'^2 in f
    D: Optional[RationalPoly]  # derivata_1 - derivata_2 in f^2
    verdict: str
    audit: dict = field(default_factory=dict)


def _displayed(m: Fraction, c: Fraction):
    """The eliminations in the form they are usually displayed."""
    prel = (4 - m, RationalPoly((0, 0, -(m * m + 3 * m - 1) * c, 0, m * m * (m * m + 4 * m + 9) / (2 * (m - 1)))))
    if m == 4:
        return prel, None, None
    d1 = RationalPoly((0, 0, -(m * m + 3 * m - 1) * c / (2 * (4 - m)), 0,
                       m * m * (m * m + 4 * m + 9) / (8 * (4 - m) * (m - 1))), symbolic_constant="C")
    d2 = RationalPoly((0, 0, -(2 * m + 1) * (m + 2) * c / (3 * (4 - m)), 0,
                       m * m * (m + 5) * (m + 2) / (4 * (4 - m) * (m - 1))))
    return prel, d1, d2


def _rederived(first: OdeRelation, second: OdeRelation, m: Fraction):
    """Eliminations recomputed from the two ODE relations."""
    comb = first.scale(m + 5) + second.scale(-3 * (m - 1))
    assert comb.fp2 == 0
    # comb.ffpp * f f'' + comb.f4 f^4 + comb.f2 f^2 = 0, normalised to (4-m) f f'' = rhs
    s = (4 - m) / comb.ffpp if m != 4 else Fraction(1, 2)
    prel = (comb.ffpp * s, RationalPoly((0, 0, -comb.f2 * s, 0, -comb.f4 * s)))
    if m == 4:
        return prel, None, None
    # (4-m) f f'' = P f^4 + Q f^2; times f'/f and integrate:
    # (4-m) f'^2 / 2 = P f^4 / 4 + Q f^2 / 2 + C
    P, Q = prel[1].coefficient(4), prel[1].coefficient(2)
    d1 = RationalPoly((0, 0, Q / (4 - m), 0, P / (2 * (4 - m))), symbolic_constant="C")
    diff = second + first.scale(-1)
    assert diff.ffpp == 0
    d2 = RationalPoly((0, 0, -diff.f2 / diff.fp2, 0, -diff.f4 / diff.fp2))
    return prel, d1, d2


def _verdict(m, d1, d2):
    if m == 4:
        return M4_BRANCH, None
    D = (d1 - d2).in_square()
    return (F_CONSTANT if D.nonconstant_nonzero() else INCONSISTENT), D


def two_curvature_system(m: int, c: Number = 1) -> CurvatureSystem:
    """Exact polynomial data of the two-principal-curvature argument.

    The main fields follow the displayed eliminations.  ``audit`` holds the
    same objects recomputed from the two ODE relations, together with the
    verdict they give, so that discrepancies in the displayed coefficients are
    visible without changing the outcome.
    """
    if int(m) != m or m < 2:
        raise ValueError("m must be an integer >= 2")
    mq, cq = _q(m), _q(c)
    first, second = first_fundamental(mq, cq), second_fundamental(mq, cq)
    prel, d1, d2 = _displayed(mq, cq)
    verdict, D = _verdict(mq, d1, d2)
    rprel, rd1, rd2 = _rederived(first, second, mq)
    rverdict, rD = _verdict(mq, rd1, rd2)
    audit = {"prel_f": rprel, "derivata_1": rd1, "derivata_2": rd2, "D": rD, "verdict": rverdict,
             "prel_f_matches": rprel[1] == prel[1] and rprel[0] == prel[0],
             "derivata_1_matches": rd1 == d1, "derivata_2_matches": rd2 == d2}
    return CurvatureSystem(int(m), cq, first, second, prel, d1, d2, D, verdict, audit)


def d_f4_coefficient_closed_form(m: int) -> Fraction:
    """f^4 coefficient of D from the displayed eliminations: m^2(-m^2-10m-11)/(8(4-m)(m-1))."""
    m = _q(m)
    return m * m * (-m * m - 10 * m - 11) / (8 * (4 - m) * (m - 1))


def constant_solution(m: int, c: Number) -> tuple:
    """(f^2, |A|^2) for f' = f'' = 0 in the first relation; |A|^2 equals m c."""
    rel = first_fundamental(m, c)
    f2 = rel.constant_solution()
    return f2, squared_norm_A_coefficient(m) * f2


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class NonexistenceVerdict:
    m: int
    c: Fraction
    required_A2: Fraction
    verdict: str


def hyperbolic_nonexistence(m: int, c: Number = -1) -> NonexistenceVerdict:
    """CMC biharmonic hypersurface in a space form of curvature c needs |A|^2 = m c."""
    if m < 1:
        raise ValueError("m must be >= 1")
    req = _q(m) * _q(c)
    return NonexistenceVerdict(int(m), _q(c), req, NONEXISTENT if req < 0 else NO_CONTRADICTION)


def _k(k) -> Fraction:
    k = _q(k)
    if not 0 < k <= 1:
        raise ValueError("k = |H|^2 must lie in (0, 1]")
    return k


def scalar_curvature_cmc(m: int, k: Number) -> Fraction:
    """s = m^2 (1 + k) - 2m for a CMC proper biharmonic hypersurface with |H|^2 = k."""
    k = _k(k)
    return _q(m) ** 2 * (1 + k) - 2 * m


def pseudo_umbilical_bound(m: int, k: Number) -> tuple:
    """(m(m-1)(1+k), whether the value reaches 2m(m-1))."""
    k = _k(k)
    bound = _q(m) * (m - 1) * (1 + k)
    return bound, k == 1


def _exact_sqrt(k: Fraction) -> Optional[Fraction]:
    n, d = math.isqrt(k.numerator), math.isqrt(k.denominator)
    return Fraction(n, d) if n * n == k.numerator and d * d == k.denominator else None


def type_eigenvalues(m: int, k: Number):
    """Eigenvalues of a CMC proper biharmonic submanifold with |H|^2 = k.

    k = 1 gives the single value 2m; otherwise (m(1 + sqrt k), m(1 - sqrt k)).
    Values are exact Fractions when sqrt k is rational, floats otherwise.
    """
    k = _k(k)
    if k == 1:
        return Fraction(2 * m)
    r = _exact_sqrt(k)
    if r is None:
        r = math.sqrt(k)
        return (m * (1 + r), m * (1 - r))
    return (m * (1 + r), m * (1 - r))


@dataclass(frozen=True)
class ClashVerdict:
    m: int
    first: Fraction  # -m/4
    second: Fraction  # (2-m)/2
    verdict: str


def pseudo_umbilical_coefficient_clash(m: int) -> ClashVerdict:
    """Compare the two grad|H|^2 coefficients of a pseudo-umbilical biharmonic submanifold."""
    if m < 1:
        raise ValueError("m must be >= 1")
    a = Fraction(-m, 4)
    b = Fraction(2 - m, 2)
    return ClashVerdict(int(m), a, b, UNDETERMINED if a == b else CMC_FORCED)


def analysis_table(ms: Sequence[int], cs: Sequence[Number]) -> list:
    """Rows of verdicts for the CLI ``analysis`` command."""
    rows = []
    for m in ms:
        for c in cs:
            row = {"m": int(m), "c": str(_q(c))}
            if m >= 2:
                sys = two_curvature_system(m, c)
                row["two_curvature"] = sys.verdict
                row["D_f4"] = "" if sys.D is None else str(sys.D.coefficient(2))
                row["D_f2"] = "" if sys.D is None else str(sys.D.coefficient(1))
            else:
                row["two_curvature"] = "n/a"
                row["D_f4"] = row["D_f2"] = ""
            row["cmc_hypersurface"] = hyperbolic_nonexistence(m, c).verdict
            row["pseudo_umbilical_clash"] = pseudo_umbilical_coefficient_clash(m).verdict
            row["flag"] = "m=4 branch" if m == 4 else ""
            rows.append(row)
    return rows
