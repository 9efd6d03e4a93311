"""Upper half-plane numerics.

Möbius maps are real 2×2 matrices of determinant one, modulo sign. Ideal
points are floats with ``math.inf`` standing for the point at infinity.
The kernel ``R(u) = u log|(u+1)/(u-1)| - 2`` and its companion
``S(t) = R(cosh t)`` evaluate the distance and angle sums; both switch to
their power series once the argument is large enough that the closed form
would cancel catastrophically.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from teich.errors import (
    CoincidentPoints,
    GeometryError,
    NonpositiveParam,
    NotInUpperHalfPlane,
    OutOfRange,
    SingularArgument,
)
from teich.services.numerics import CompensatedSum, log_gamma

logger = logging.getLogger(__name__)

INF = math.inf
Point = Union[float, complex]

# switch-over for the series branches of R and S
_SERIES_FROM = 2.0


def _is_inf(x: Point) -> bool:
    return isinstance(x, float) and math.isinf(x)


@dataclass(frozen=True)
class MoebiusMap:
    """A PSL(2,ℝ) element stored as a determinant-one numpy matrix."""

    matrix: np.ndarray

    @classmethod
    def from_entries(cls, a: float, b: float, c: float, d: float) -> "MoebiusMap":
        return cls.from_matrix(np.array([[a, b], [c, d]], dtype=float))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "MoebiusMap":
        """Normalize to determinant one.

        Raises:
            GeometryError: the determinant is not positive.
        """
        m = np.asarray(m, dtype=float)
        det = float(np.linalg.det(m))
        if not det > 0:
            raise GeometryError(f"matrix determinant {det!r} is not positive")
        return cls(m / math.sqrt(det))

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(np.eye(2))

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(self.matrix @ other.matrix)

    def inverse(self) -> "MoebiusMap":
        (a, b), (c, d) = self.matrix
        return MoebiusMap(np.array([[d, -b], [-c, a]]))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def kind(self, tol: float = 1e-9) -> str:
        t = abs(self.trace)
        if abs(t - 2.0) <= tol:
            return "parabolic"
        return "hyperbolic" if t > 2.0 else "elliptic"

    def __call__(self, z: Point) -> Point:
        (a, b), (c, d) = self.matrix
        if _is_inf(z):
            return a / c if c != 0 else INF
        den = c * z + d
        if den == 0:
            return INF
        return (a * z + b) / den

    def fixed_points(self) -> Tuple[Point, Point]:
        """Fixed points of a hyperbolic or parabolic map as (repelling, attracting).

        Raises:
            OutOfRange: the map is elliptic.
        """
        (a, b), (c, d) = self.matrix
        disc = (a - d) ** 2 + 4 * b * c
        if disc < -1e-12:
            raise OutOfRange("elliptic map has no real fixed points")
        root = math.sqrt(max(disc, 0.0))
        if c == 0:
            if a == d:
                return INF, INF
            finite = b / (d - a)
            # z -> (a/d) z + b/d expands towards infinity when |a| > |d|
            return (finite, INF) if abs(a) > abs(d) else (INF, finite)
        x1, x2 = ((a - d) - root) / (2 * c), ((a - d) + root) / (2 * c)
        if abs(c * x1 + d) > abs(c * x2 + d):
            return x2, x1
        return x1, x2

    def translation_length(self) -> float:
        """2 arccosh(|tr|/2) for a hyperbolic map.

        Raises:
            OutOfRange: the map is not hyperbolic.
        """
        t = abs(self.trace)
        if t <= 2.0:
            raise OutOfRange(f"|trace| {t!r} <= 2: map is not hyperbolic")
        return 2.0 * math.acosh(t / 2.0)

    def axis(self) -> "GeodesicLine":
        start, end = self.fixed_points()
        return GeodesicLine(start, end)


@dataclass(frozen=True)
class GeodesicLine:
    """Oriented hyperbolic geodesic from ``start`` to ``end`` (ideal points)."""

    start: float
    end: float

    def __post_init__(self) -> None:
        if self.start == self.end:
            raise CoincidentPoints(f"geodesic endpoints coincide at {self.start!r}")

    @classmethod
    def from_triple(cls, a: int, b: int, c: int) -> "GeodesicLine":
        """Line a(x²+y²) + bx + c = 0, oriented from (-b-√D)/2a to (-b+√D)/2a.

        Vertical lines (a = 0) run up from -c/b when b > 0 and down to it otherwise.
        """
        disc = b * b - 4 * a * c
        if disc <= 0:
            raise GeometryError(f"triple ({a}, {b}, {c}) has discriminant {disc} <= 0")
        if a == 0:
            foot = -c / b
            return cls(foot, INF) if b > 0 else cls(INF, foot)
        root = math.sqrt(disc)
        return cls((-b - root) / (2 * a), (-b + root) / (2 * a))

    def reversed(self) -> "GeodesicLine":
        return GeodesicLine(self.end, self.start)

    def image(self, g: MoebiusMap) -> "GeodesicLine":
        return GeodesicLine(g(self.start), g(self.end))

    def endpoints(self) -> frozenset:
        return frozenset((self.start, self.end))


@dataclass(frozen=True)
class LineRelation:
    """How two geodesics sit relative to each other.

    ``kind`` is one of ``intersecting``, ``ultraparallel``, ``asymptotic``
    or ``equal``; ``u`` is the invariant with |u| = cos θ or cosh d.
    """

    kind: str
    u: float

    @property
    def value(self) -> float:
        return abs(self.u)


def _same_point(x: float, y: float, tol: float) -> bool:
    if _is_inf(x) or _is_inf(y):
        return _is_inf(x) and _is_inf(y)
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def cross_ratio(p: float, q: float, r: float, s: float) -> float:
    """(p-r)(q-s) / ((p-s)(q-r)); factors involving an infinite point cancel.

    Raises:
        CoincidentPoints: two of the points coincide.
    """
    points = (p, q, r, s)
    for i in range(4):
        for j in range(i + 1, 4):
            if _same_point(points[i], points[j], 0.0):
                raise CoincidentPoints(f"cross ratio needs distinct points, got {points!r}")

    def factor(x: float, y: float) -> float:
        return 1.0 if _is_inf(x) or _is_inf(y) else x - y

    return factor(p, r) * factor(q, s) / (factor(p, s) * factor(q, r))


def to_imaginary_axis(line: GeodesicLine) -> MoebiusMap:
    """Orientation-preserving map sending line.start -> 0 and line.end -> inf."""
    p, q = line.start, line.end
    if _is_inf(q):
        m = np.array([[1.0, -p], [0.0, 1.0]])
    elif _is_inf(p):
        m = np.array([[0.0, -1.0], [1.0, -q]])
    else:
        m = np.array([[1.0, -p], [1.0, -q]])
        if p - q < 0:
            m = np.array([[-1.0, p], [1.0, -q]])
    return MoebiusMap.from_matrix(m)


def line_relation(first: GeodesicLine, second: GeodesicLine, tol: float = 1e-12) -> LineRelation:
    """Classify two geodesics by u = (κ+1)/(κ-1).

    ``first`` is moved to the imaginary axis; κ is the ratio of the image
    endpoints of ``second``. |u| < 1 means the lines cross at angle arccos|u|,
    |u| > 1 that they are ultraparallel at cosh-distance |u|.
    """
    ends1, ends2 = (first.start, first.end), (second.start, second.end)
    shared = sum(1 for x in ends1 for y in ends2 if _same_point(x, y, tol))
    if shared >= 2:
        return LineRelation("equal", 1.0)
    if shared == 1:
        return LineRelation("asymptotic", 1.0)
    g = to_imaginary_axis(first)
    k1, k2 = g(second.start), g(second.end)
    kappa = k1 / k2
    u = (kappa + 1.0) / (kappa - 1.0)
    if abs(u) < 1.0:
        return LineRelation("intersecting", u)
    return LineRelation("ultraparallel", u)


def signed_cosine(first: GeodesicLine, second: GeodesicLine) -> float:
    """cos of the angle from ``first`` to ``second`` at their crossing (orientations respected).

    Raises:
        GeometryError: the lines do not cross.
    """
    g = to_imaginary_axis(first)
    k1, k2 = g(second.start), g(second.end)
    if _is_inf(k1) or _is_inf(k2) or not k1 * k2 < 0:
        raise GeometryError("lines do not cross")
    return (k1 + k2) / (k2 - k1)


def line_angle_cosine(first: GeodesicLine, second: GeodesicLine) -> float:
    """cos θ for the counterclockwise angle θ in (0, π) turning line ``first`` onto ``second``.

    Orientations of both lines are ignored.

    Raises:
        GeometryError: the lines do not cross.
    """
    g = to_imaginary_axis(first)
    k1, k2 = g(second.start), g(second.end)
    if _is_inf(k1) or _is_inf(k2) or not k1 * k2 < 0:
        raise GeometryError("lines do not cross")
    return -(k1 + k2) / abs(k2 - k1)


# --- special functions --------------------------------------------------------------


def R_series(u: float, terms: int = 60) -> float:
    """2 Σ_{k>=1} u^{-2k} / (2k+1), valid for |u| > 1."""
    if abs(u) <= 1.0:
        raise OutOfRange(f"series for R needs |u| > 1, got {u!r}")
    inv2 = 1.0 / (u * u)
    power, total = inv2, 0.0
    for k in range(1, terms + 1):
        term = power / (2 * k + 1)
        total += term
        if term < 1e-18 * total:
            break
        power *= inv2
    return 2.0 * total


def R(u: float) -> float:
    """u log|(u+1)/(u-1)| - 2 (an even function of u).

    Raises:
        SingularArgument: u = ±1.
    """
    a = abs(u)
    if a == 1.0:
        raise SingularArgument("R is singular at u = ±1")
    if a >= _SERIES_FROM:
        return R_series(a)
    if a == 0.0:
        return -2.0
    return a * (math.log1p(a) - math.log(abs(1.0 - a))) - 2.0


def S(t: float) -> float:
    """R(cosh t) = 2 cosh t log coth(t/2) - 2 for t > 0.

    Raises:
        SingularArgument: t = 0.
        OutOfRange: t < 0.
    """
    if t == 0.0:
        raise SingularArgument("S is singular at t = 0")
    if t < 0.0:
        raise OutOfRange(f"S needs t > 0, got {t!r}")
    ch = math.cosh(t)
    if ch >= _SERIES_FROM:
        return R_series(ch)
    return -2.0 * ch * math.log(math.tanh(t / 2.0)) - 2.0


def lambda_fn(a: float) -> float:
    """a(1-a) / (2 sin πa), extended continuously by 1/(2π) at a = 0, 1.

    Raises:
        OutOfRange: a outside [0, 1].
    """
    if not 0.0 <= a <= 1.0:
        raise OutOfRange(f"lambda_fn needs 0 <= a <= 1, got {a!r}")
    if a == 0.0 or a == 1.0:
        return 1.0 / (2.0 * math.pi)
    return a * (1.0 - a) / (2.0 * math.sin(math.pi * a))


# --- circuit sums -------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitSum:
    value: float
    tail_bound: float
    terms: int


def circuit_tail_bound(t_next: float, ell: float) -> float:
    """Bound on Σ_{k>=0} S(t_next + kℓ) from S(t) <= (2/3) / sinh² t."""
    q = math.exp(-2.0 * t_next)
    return (8.0 / 3.0) * q / ((1.0 - q) ** 2 * (-math.expm1(-2.0 * ell)))


def circuit_sum_brute(a: float, ell: float, tail_tol: float = 1e-14) -> CircuitSum:
    """Σ_{n>=0} S((a+n)ℓ), truncated once the tail bound drops below ``tail_tol``.

    Raises:
        NonpositiveParam: a <= 0 or ℓ <= 0.
    """
    if not a > 0:
        raise NonpositiveParam(f"circuit sum needs a > 0, got {a!r}")
    if not ell > 0:
        raise NonpositiveParam(f"circuit sum needs ell > 0, got {ell!r}")
    acc = CompensatedSum()
    n = 0
    while True:
        t = (a + n) * ell
        if t > 0.5:
            bound = circuit_tail_bound(t, ell)
            if bound < tail_tol:
                break
        acc.add(S(t))
        n += 1
    logger.debug("circuit sum a=%g ell=%g: %d terms, tail <= %.3g", a, ell, n, bound)
    return CircuitSum(value=acc.value, tail_bound=bound, terms=n)


def two_sided_brute(a: float, ell: float, tail_tol: float = 1e-14) -> CircuitSum:
    """Σ_{n∈ℤ} S(|a+n|ℓ) for 0 < a < 1."""
    if not 0.0 < a < 1.0:
        raise OutOfRange(f"two-sided circuit sum needs 0 < a < 1, got {a!r}")
    left = circuit_sum_brute(a, ell, tail_tol / 2)
    right = circuit_sum_brute(1.0 - a, ell, tail_tol / 2)
    return CircuitSum(
        value=left.value + right.value,
        tail_bound=left.tail_bound + right.tail_bound,
        terms=left.terms + right.terms,
    )


def circuit_sum_asymptotic(a: float, ell: float, convention: str = "gamma") -> float:
    """Small-ℓ expansion 2/ℓ + log(Γ(a)² ℓ^{2a-1} / (2^{2a} π)) + 2a - 1.

    ``convention="shifted"`` uses Γ(a+1) in place of Γ(a), a constant offset
    of 2 log a; the two agree at a = 1.
    """
    if not a > 0:
        raise OutOfRange(f"asymptotic circuit sum needs a > 0, got {a!r}")
    if not ell > 0:
        raise OutOfRange(f"asymptotic circuit sum needs ell > 0, got {ell!r}")
    if convention == "gamma":
        lg = log_gamma(a)
    elif convention == "shifted":
        lg = log_gamma(a + 1.0)
    else:
        raise OutOfRange(f"unknown convention {convention!r}")
    return (
        2.0 / ell
        + 2.0 * lg
        + (2.0 * a - 1.0) * math.log(ell)
        - 2.0 * a * math.log(2.0)
        - math.log(math.pi)
        + 2.0 * a
        - 1.0
    )


def a1_asymptotic(ell: float) -> float:
    """2/ℓ + log(ℓ/(4π)) + 1."""
    if not ell > 0:
        raise OutOfRange(f"asymptotic circuit sum needs ell > 0, got {ell!r}")
    return 2.0 / ell + math.log(ell / (4.0 * math.pi)) + 1.0


def two_sided_asymptotic(a: float, ell: float, convention: str = "gamma") -> float:
    """4/ℓ - 2 log(2 sin πa); the shifted convention gives 4/ℓ + 2 log λ(a)."""
    if not 0.0 < a < 1.0:
        raise OutOfRange(f"two-sided expansion needs 0 < a < 1, got {a!r}")
    if not ell > 0:
        raise OutOfRange(f"two-sided expansion needs ell > 0, got {ell!r}")
    if convention == "shifted":
        return 4.0 / ell + 2.0 * math.log(lambda_fn(a))
    if convention != "gamma":
        raise OutOfRange(f"unknown convention {convention!r}")
    return 4.0 / ell - 2.0 * math.log(2.0 * math.sin(math.pi * a))


# --- the cusp Gardiner series ---------------------------------------------------------


def _check_upper(z: complex) -> complex:
    z = complex(z)
    if not z.imag > 0:
        raise NotInUpperHalfPlane(f"need Im z > 0, got {z!r}")
    return z


def gardiner_cusp_partial_sum(z: complex, n_max: int) -> complex:
    """Σ_{|n|<=N} 1/(z-n)².

    Raises:
        NotInUpperHalfPlane: Im z <= 0.
        NonpositiveParam: N < 1.
    """
    z = _check_upper(z)
    if n_max < 1:
        raise NonpositiveParam(f"partial sum needs N >= 1, got {n_max!r}")
    n = np.arange(-n_max, n_max + 1, dtype=float)
    # sum from the outside in so the small terms accumulate first
    order = np.argsort(-np.abs(n))
    terms = 1.0 / (z - n[order]) ** 2
    return complex(np.sum(terms))


def gardiner_cusp_limit(z: complex) -> complex:
    """π² / sin²(πz)."""
    z = _check_upper(z)
    return (math.pi / cmath.sin(math.pi * z)) ** 2


def length_differential(z: complex) -> complex:
    """2π csc²(πz): the cusp sum scaled by 2/π."""
    return 2.0 / math.pi * gardiner_cusp_limit(z)


def gardiner_tail_estimate(z: complex, n_max: int) -> float:
    """Leading size of the omitted tail, about 2/N."""
    _check_upper(z)
    return 2.0 / n_max

