"""The PSL(2,ℤ) tessellation of the upper half-plane.

Tessellation lines are stored as primitive integer triples ``(a, b, c)``
for a(x²+y²) + bx + c = 0, so deduplication and the classification of a
pair of lines (crossing, asymptotic, ultraparallel) are exact integer
arithmetic. The orbit of the imaginary axis consists of the 2-lines
(discriminant 1), the orbit of the unit semicircle of the 323-lines
(discriminant 4).

Two enumerations are provided. ``enumerate_lines`` walks the orbit by
words in T, T⁻¹, S. ``lines_near`` solves for every line within a given
distance datum of a reference line directly, in the frame where the
reference is the imaginary axis or the unit semicircle; it is the one the
sums use.

On top sit the weighted ultraparallel sums, the distance relation for the
tessellation, the ideal-geodesic pairing on the Γ(2) pillow and the cosine
sums over crossings of an ideal geodesic with a closed one.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy import divisors

from teich.errors import (
    CutoffTooSmall,
    MissingWeight,
    NoIntersections,
    SeedNotPrimitive,
    TessellationError,
    Unbalanced,
    UnsupportedGroup,
)
from teich.hyperbolic import (
    GeodesicLine,
    LineRelation,
    MoebiusMap,
    R,
    lambda_fn,
    line_angle_cosine,
    to_imaginary_axis,
)
from teich.services.numerics import CompensatedSum

logger = logging.getLogger(__name__)

# (p, q, r, s) is the matrix (p q; r s)
Matrix = Tuple[int, int, int, int]
IntPoint = Tuple[int, int]

T: Matrix = (1, 1, 0, 1)
T_INV: Matrix = (1, -1, 0, 1)
S: Matrix = (0, -1, 1, 0)
GENERATORS: Tuple[Matrix, ...] = (T, T_INV, S)

TWO_LINE = "2-line"
THREE_TWO_THREE_LINE = "323-line"

DEDEKIND_TARGET = 6.0 * math.log(3.0) + 4.0 * math.log(math.pi) - 26.0 * math.log(2.0)
# Limit of the summed relation about a 323-line and a 2-line, extrapolated
# from cutoffs 100 to 5000 (error ~ 0.5/cutoff). It is not DEDEKIND_TARGET.
DEDEKIND_LIMIT = 0.99545
# The σ self-pairing bracket: reduced, cusp and crossing terms total
# -3·DEDEKIND_TARGET and the ultraparallel terms 3Δ.
SIGMA_BRACKET_LIMIT = 3.0 * (DEDEKIND_LIMIT - DEDEKIND_TARGET)


def mat_mul(g: Matrix, h: Matrix) -> Matrix:
    p, q, r, s = g
    p2, q2, r2, s2 = h
    return (p * p2 + q * r2, p * q2 + q * s2, r * p2 + s * r2, r * q2 + s * s2)


def mat_inv(g: Matrix) -> Matrix:
    p, q, r, s = g
    return (s, -q, -r, p)


def _primitive(a: int, b: int, c: int) -> bool:
    return math.gcd(math.gcd(a, b), c) == 1


def _normalized(a: int, b: int, c: int) -> Tuple[int, int, int]:
    g = math.gcd(math.gcd(a, b), c)
    if g == 0:
        raise TessellationError("the zero triple is not a line")
    a, b, c = a // g, b // g, c // g
    if a < 0 or (a == 0 and b < 0):
        a, b, c = -a, -b, -c
    return a, b, c


@dataclass(frozen=True, order=True)
class TessLine:
    """An unoriented geodesic a(x²+y²) + bx + c = 0 with a primitive, sign-normalized triple."""

    a: int
    b: int
    c: int

    @classmethod
    def of(cls, a: int, b: int, c: int) -> "TessLine":
        """Normalize an integer triple (divide out the gcd, fix the sign).

        Raises:
            TessellationError: b² - 4ac <= 0 (not a geodesic).
        """
        if b * b - 4 * a * c <= 0:
            raise TessellationError(f"triple ({a}, {b}, {c}) does not describe a geodesic")
        return cls(*_normalized(a, b, c))

    @classmethod
    def through(cls, first: IntPoint, second: IntPoint) -> "TessLine":
        """The line joining the cusps p/q and r/s (``(1, 0)`` is ∞)."""
        p, q = first
        r, s = second
        return cls.of(q * s, -(p * s + q * r), p * r)

    @property
    def triple(self) -> Tuple[int, int, int]:
        return (self.a, self.b, self.c)

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def kind(self) -> str:
        disc = self.discriminant
        if disc == 1:
            return TWO_LINE
        if disc == 4:
            return THREE_TWO_THREE_LINE
        return "other"

    def act(self, g: Matrix) -> "TessLine":
        """Image of the line under the Möbius map of ``g``."""
        p, q, r, s = g
        a, b, c = self.a, self.b, self.c
        return TessLine(
            *_normalized(
                a * s * s - b * r * s + c * r * r,
                -2 * a * q * s + b * (p * s + q * r) - 2 * c * p * r,
                a * q * q - b * p * q + c * p * p,
            )
        )

    def endpoints(self) -> Tuple[IntPoint, IntPoint]:
        """Both ideal endpoints as primitive integer vectors (p, q), q >= 0.

        Raises:
            TessellationError: the endpoints are irrational.
        """
        disc = self.discriminant
        root = math.isqrt(disc)
        if root * root != disc:
            raise TessellationError(f"{self.triple} has irrational endpoints")
        if self.a == 0:
            foot = Fraction(-self.c, self.b)
            return (1, 0), (foot.numerator, foot.denominator)
        low = Fraction(-self.b - root, 2 * self.a)
        high = Fraction(-self.b + root, 2 * self.a)
        return (low.numerator, low.denominator), (high.numerator, high.denominator)

    def geodesic(self) -> GeodesicLine:
        return GeodesicLine.from_triple(self.a, self.b, self.c)

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"


IMAGINARY_AXIS = TessLine(0, 1, 0)
UNIT_SEMICIRCLE = TessLine(1, 0, -1)


def parse_line(value: Sequence[int]) -> TessLine:
    """TessLine from a user-supplied triple.

    Raises:
        SeedNotPrimitive: the triple has a common factor.
        TessellationError: it is not a line of the tessellation.
    """
    a, b, c = (int(x) for x in value)
    if not _primitive(a, b, c):
        raise SeedNotPrimitive(f"triple ({a}, {b}, {c}) is not primitive")
    line = TessLine.of(a, b, c)
    if line.kind == "other":
        raise TessellationError(f"{line} has discriminant {line.discriminant}; not a tessellation line")
    return line


def pairing(first: TessLine, second: TessLine) -> int:
    """The invariant bilinear pairing b₁b₂ - 2a₁c₂ - 2a₂c₁ of two triples."""
    return first.b * second.b - 2 * first.a * second.c - 2 * second.a * first.c


def relation(first: TessLine, second: TessLine) -> LineRelation:
    """Exact classification of two lines, with |u| = cos θ or cosh d.

    |u| = |B| / sqrt(D₁D₂) for the pairing B; the comparison of B² with
    D₁D₂ is done in integers.
    """
    if first == second:
        return LineRelation("equal", 1.0)
    b = pairing(first, second)
    dd = first.discriminant * second.discriminant
    if b * b == dd:
        return LineRelation("asymptotic", 1.0)
    u = abs(b) / math.sqrt(dd)
    return LineRelation("intersecting" if b * b < dd else "ultraparallel", u)


def reference_line(kind: str) -> TessLine:
    if kind == TWO_LINE:
        return IMAGINARY_AXIS
    if kind == THREE_TWO_THREE_LINE:
        return UNIT_SEMICIRCLE
    raise TessellationError(f"no reference line of kind {kind!r}")


def canonical_frame(line: TessLine) -> Matrix:
    """A determinant-one integer matrix taking the reference line of ``line.kind`` onto ``line``.

    Raises:
        TessellationError: ``line`` is not a tessellation line.
    """
    (p1, q1), (p2, q2) = line.endpoints()
    kind = line.kind
    if kind == TWO_LINE:
        g = (p1, p2, q1, q2)
        if p1 * q2 - p2 * q1 < 0:
            g = (p2, p1, q2, q1)
        return g
    if kind == THREE_TWO_THREE_LINE:
        if p1 * q2 - p2 * q1 < 0:
            p2, q2 = -p2, -q2
        # columns (v1 - v2)/2 and (v1 + v2)/2 send 1 -> v1 and -1 -> v2
        return ((p1 - p2) // 2, (p1 + p2) // 2, (q1 - q2) // 2, (q1 + q2) // 2)
    raise TessellationError(f"{line} is not a tessellation line")


# --- exact enumeration around the reference lines -----------------------------------


def _accepts(n: int, which: str) -> bool:
    if n == 0:
        return False
    if which == "intersecting":
        return n < 0
    if which == "ultraparallel":
        return n > 0
    return True


def _around_imaginary_axis(disc: int, bound: float, which: str) -> List[Tuple[int, int, int]]:
    # the pairing with (0,1,0) is b; a·c is then fixed by the discriminant
    limit = int(math.floor(bound * math.sqrt(disc) + 1e-9))
    found = set()
    for b in range(-limit, limit + 1):
        n = b * b - disc
        if not _accepts(n, which) or n % 4 or b * b > bound * bound * disc:
            continue
        product = n // 4
        for d in divisors(abs(product)):
            for a in (d, -d):
                c = product // a
                if _primitive(a, b, c):
                    found.add(_normalized(a, b, c))
    return sorted(found)


def _around_unit_semicircle(disc: int, bound: float, which: str) -> List[Tuple[int, int, int]]:
    # with t = a - c and m = a + c the pairing is 2t and (m - b)(m + b) = t² - D
    limit = int(math.floor(bound * math.sqrt(disc) + 1e-9))
    found = set()
    for t in range(-limit, limit + 1):
        n = t * t - disc
        if not _accepts(n, which) or t * t > bound * bound * disc:
            continue
        for d in divisors(abs(n)):
            for d1 in (d, -d):
                d2 = n // d1
                if (d1 + d2) % 2:
                    continue
                m, b = (d1 + d2) // 2, (d2 - d1) // 2
                if (m + t) % 2:
                    continue
                a, c = (m + t) // 2, (m - t) // 2
                if _primitive(a, b, c):
                    found.add(_normalized(a, b, c))
    return sorted(found)


@dataclass(frozen=True)
class NearbyLine:
    line: TessLine
    relation: LineRelation


def lines_near(
    reference: TessLine,
    bound: float,
    which: str = "ultraparallel",
    discriminants: Iterable[int] = (1, 4),
    threads: int = 1,
) -> List[NearbyLine]:
    """Every tessellation line whose datum |u| relative to ``reference`` is at most ``bound``.

    ``which`` selects ``ultraparallel`` lines (1 < |u| <= bound),
    ``intersecting`` ones (|u| < 1) or ``all`` of both; asymptotic lines
    and the reference itself are never returned. The result is sorted by
    (|u|, triple).

    Raises:
        TessellationError: ``reference`` is not a tessellation line or
            ``which`` is unknown.
    """
    if which not in ("ultraparallel", "intersecting", "all"):
        raise TessellationError(f"unknown selection {which!r}")
    frame = canonical_frame(reference)
    around = _around_imaginary_axis if reference.kind == TWO_LINE else _around_unit_semicircle
    discs = list(discriminants)
    with ThreadPoolExecutor(max_workers=max(1, min(threads, len(discs)))) as pool:
        batches = list(pool.map(lambda d: around(d, bound, which), discs))
    result = []
    for batch in batches:
        for triple in batch:
            line = TessLine(*triple).act(frame)
            result.append(NearbyLine(line, relation(reference, line)))
    result.sort(key=lambda item: (item.relation.value, item.line.triple))
    logger.debug("%d lines within %s of %s (%s)", len(result), bound, reference, which)
    return result


# --- orbit walk ---------------------------------------------------------------------


def _other_endpoint_size(line: TessLine) -> Optional[float]:
    """|x| of the endpoint not in {0, ∞} for a line asymptotic to the imaginary axis."""
    if line.a == 0:
        return abs(line.c / line.b)
    if line.c == 0:
        return abs(line.b / line.a)
    return None


def enumerate_lines(
    seed: TessLine | Sequence[int], bound: float, max_word_length: Optional[int] = None
) -> Tuple[TessLine, ...]:
    """The orbit of ``seed`` within datum ``bound`` of the imaginary axis.

    Breadth-first search over T, T⁻¹ and S acting on triples. The walk
    keeps lines with |u| <= bound, the lines asymptotic to the axis whose
    other endpoint x satisfies 1/(2·bound+2) <= |x| <= 2·bound+2, and the
    axis itself; every line of the orbit within the bound is joined to the
    starting line by a path through kept lines. The walk starts at the
    imaginary axis or the unit semicircle, whichever shares the seed's
    orbit. Returned are the crossing and ultraparallel lines within the
    bound, in triple order.

    Raises:
        SeedNotPrimitive: the seed triple has a common factor.
        TessellationError: the seed is not a tessellation line.
    """
    seed = parse_line(seed.triple if isinstance(seed, TessLine) else seed)
    start = reference_line(seed.kind)
    limit = 2.0 * bound + 2.0

    def keep(line: TessLine) -> bool:
        rel = relation(IMAGINARY_AXIS, line)
        if rel.kind == "equal":
            return True
        if rel.kind == "asymptotic":
            size = _other_endpoint_size(line)
            return size is not None and 1.0 / limit <= size <= limit
        return rel.value <= bound

    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        line, depth = frontier.popleft()
        if max_word_length is not None and depth >= max_word_length:
            continue
        for g in GENERATORS:
            image = line.act(g)
            if image not in seen and keep(image):
                seen.add(image)
                frontier.append((image, depth + 1))
    within = [
        line
        for line in seen
        if relation(IMAGINARY_AXIS, line).kind in ("intersecting", "ultraparallel")
    ]
    logger.debug("orbit walk from %s kept %d lines, %d within %s", start, len(seen), len(within), bound)
    return tuple(sorted(within))


# --- weighted sums and the distance relation ----------------------------------------


def line_weight(line: TessLine) -> int:
    """+1 for 323-lines, -1 for 2-lines."""
    if line.kind == THREE_TWO_THREE_LINE:
        return 1
    if line.kind == TWO_LINE:
        return -1
    raise TessellationError(f"{line} carries no weight")


@dataclass(frozen=True)
class Shell:
    """Cumulative state of a sum up to ``upper`` in the datum."""

    upper: float
    count: int
    partial: float


@dataclass(frozen=True)
class UltraparallelSum:
    value: float
    count: int
    cutoff: float
    shells: Tuple[Shell, ...]
    tail_bound: float


def _shell_bounds(cutoff: float) -> List[float]:
    return [cutoff / 8.0, cutoff / 4.0, cutoff / 2.0, cutoff]


def _tail_estimate(count_last_shell: int, cutoff: float) -> float:
    # terms ~ 2/(3u²) with a density fitted to the outermost shell (cutoff/2, cutoff]
    return 4.0 * count_last_shell / (3.0 * cutoff * cutoff)


def _shell_sum(terms: Sequence[Tuple[float, float]], cutoff: float) -> UltraparallelSum:
    """Sum (u, term) pairs already sorted by u, recording cumulative shells."""
    bounds = _shell_bounds(cutoff)
    acc = CompensatedSum()
    shells: List[Shell] = []
    k = 0
    for bound in bounds:
        while k < len(terms) and terms[k][0] <= bound:
            acc.add(terms[k][1])
            k += 1
        shells.append(Shell(upper=bound, count=k, partial=acc.value))
    last = shells[-1].count - shells[-2].count
    return UltraparallelSum(
        value=acc.value,
        count=k,
        cutoff=cutoff,
        shells=tuple(shells),
        tail_bound=_tail_estimate(last, cutoff),
    )


def weighted_ultraparallel_sum(ref: TessLine, lines: Iterable[TessLine], cutoff: float) -> UltraparallelSum:
    """Σ w(η) R(cosh d(ref, η)) over lines ultraparallel to ``ref`` with cosh d <= cutoff.

    Crossing lines, asymptotic lines and ``ref`` itself are skipped. Terms
    are added in increasing (cosh d, triple) order.

    Raises:
        CutoffTooSmall: no line contributes.
    """
    terms = []
    for line in set(lines):
        rel = relation(ref, line)
        if rel.kind == "ultraparallel" and rel.value <= cutoff:
            terms.append((rel.value, line.triple, line_weight(line) * R(rel.value)))
    if not terms:
        raise CutoffTooSmall(f"no ultraparallel line within cosh d <= {cutoff}")
    terms.sort()
    return _shell_sum([(u, term) for u, _, term in terms], cutoff)


def ultraparallel_sum_near(ref: TessLine, cutoff: float, threads: int = 1) -> UltraparallelSum:
    """The weighted ultraparallel sum about ``ref`` over the exact neighbourhood of radius ``cutoff``."""
    nearby = lines_near(ref, cutoff, "ultraparallel", threads=threads)
    if not nearby:
        raise CutoffTooSmall(f"no ultraparallel line within cosh d <= {cutoff}")
    terms = [(item.relation.value, line_weight(item.line) * R(item.relation.value)) for item in nearby]
    return _shell_sum(terms, cutoff)


@dataclass(frozen=True)
class DedekindRow:
    cutoff: float
    partial_sum_323: float
    partial_sum_2: float
    delta: float
    error: float
    terms: int


@dataclass(frozen=True)
class DedekindReport:
    cutoff: float
    partial_sum_323: float
    partial_sum_2: float
    delta: float
    target: float
    error: float
    extrapolated: float
    extrapolated_error: float
    limit: float
    limit_error: float
    tail_bound: float
    table: Tuple[DedekindRow, ...]


def dedekind_relation(
    cutoff: float,
    first: TessLine = UNIT_SEMICIRCLE,
    second: TessLine = IMAGINARY_AXIS,
    threads: int = 1,
) -> DedekindReport:
    """Δ(cutoff) = weighted sum about ``first`` minus weighted sum about ``second``.

    With a 323-line first and a 2-line second, ``target`` is the closed
    form 6 log 3 + 4 log π - 26 log 2 and ``limit`` the measured limit
    DEDEKIND_LIMIT that Δ actually converges to; with the roles swapped,
    both change sign. ``error`` compares Δ with the closed form,
    ``limit_error`` the extrapolate 2Δ(C) - Δ(C/2) with the measured limit.
    The report carries the cumulative sums at cutoff/8, /4, /2 and 1.

    Raises:
        CutoffTooSmall: cutoff < 10.
        TessellationError: the references are not one 323-line and one 2-line.
    """
    if cutoff < 10:
        raise CutoffTooSmall(f"cutoff {cutoff} is below 10")
    kinds = (first.kind, second.kind)
    if kinds == (THREE_TWO_THREE_LINE, TWO_LINE):
        target, limit = DEDEKIND_TARGET, DEDEKIND_LIMIT
    elif kinds == (TWO_LINE, THREE_TWO_THREE_LINE):
        target, limit = -DEDEKIND_TARGET, -DEDEKIND_LIMIT
    else:
        raise TessellationError(f"need a 323-line and a 2-line, got {first} and {second}")
    logger.info("dedekind relation: summing about %s and %s up to cosh d = %s", first, second, cutoff)
    with ThreadPoolExecutor(max_workers=max(1, min(threads, 2))) as pool:
        sum_first, sum_second = pool.map(lambda ref: ultraparallel_sum_near(ref, cutoff), (first, second))
    rows = []
    for s1, s2 in zip(sum_first.shells, sum_second.shells):
        delta = s1.partial - s2.partial
        rows.append(
            DedekindRow(
                cutoff=s1.upper,
                partial_sum_323=s1.partial if first.kind == THREE_TWO_THREE_LINE else s2.partial,
                partial_sum_2=s2.partial if second.kind == TWO_LINE else s1.partial,
                delta=delta,
                error=abs(delta - target),
                terms=s1.count + s2.count,
            )
        )
    delta = sum_first.value - sum_second.value
    extrapolated = 2.0 * delta - rows[-2].delta
    logger.info(
        "dedekind relation: delta %.6f, extrapolated %.6f, limit %.5f, closed form %.6f", delta, extrapolated, limit, target
    )
    return DedekindReport(
        cutoff=cutoff,
        partial_sum_323=rows[-1].partial_sum_323,
        partial_sum_2=rows[-1].partial_sum_2,
        delta=delta,
        target=target,
        error=abs(delta - target),
        extrapolated=extrapolated,
        extrapolated_error=abs(extrapolated - target),
        limit=limit,
        limit_error=abs(extrapolated - limit),
        tail_bound=sum_first.tail_bound + sum_second.tail_bound,
        table=tuple(rows),
    )


# --- the Γ(2) pillow ----------------------------------------------------------------

GAMMA2_NAMES = ("a", "b", "c", "alpha", "beta", "gamma")
GAMMA2_LIFTS: Dict[str, TessLine] = {
    "a": TessLine(1, 0, -1),
    "b": TessLine(1, -2, 0),
    "c": TessLine(0, 2, -1),
    "alpha": TessLine(0, 1, 0),
    "beta": TessLine(0, 1, -1),
    "gamma": TessLine(1, -1, 0),
}
CUSP_CLASSES = ("inf", "0", "1")
# PSL(2,Z) elements carrying ∞ to a representative of each cusp class
_CUSP_FRAMES: Dict[str, Matrix] = {"inf": (1, 0, 0, 1), "0": S, "1": (1, -1, 1, 0)}
# tessellation lines leave a width-2 cusp at ∞ at these horizontal positions
_CUSP_POSITIONS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2))
_TWO_LINE_CLASSES = {frozenset(("inf", "0")): "alpha", frozenset(("inf", "1")): "beta", frozenset(("0", "1")): "gamma"}
_LOOP_CLASSES = {"1": "a", "0": "b", "inf": "c"}


def cusp_class(point: IntPoint) -> str:
    """Γ(2) class of the cusp p/q read off from (p mod 2, q mod 2)."""
    p, q = point
    residues = (p % 2, q % 2)
    if residues == (1, 0):
        return "inf"
    if residues == (0, 1):
        return "0"
    if residues == (1, 1):
        return "1"
    raise TessellationError(f"{point} is not a primitive vector")


def gamma2_class(line: TessLine) -> str:
    """Which of the six pillow geodesics ``line`` lifts.

    A 2-line joins two distinct cusp classes; a 323-line returns to one.
    """
    first, second = (cusp_class(p) for p in line.endpoints())
    if line.kind == TWO_LINE:
        return _TWO_LINE_CLASSES[frozenset((first, second))]
    if line.kind == THREE_TWO_THREE_LINE and first == second:
        return _LOOP_CLASSES[first]
    raise TessellationError(f"{line} is not a lift of a pillow geodesic")


def line_reduced_length(line: TessLine) -> float:
    """2 log(2 |det|) between the canonical horocycles of width-2 cusps."""
    (p1, q1), (p2, q2) = line.endpoints()
    return 2.0 * math.log(2.0 * abs(p1 * q2 - p2 * q1))


def _vertical_line(x: Fraction) -> TessLine:
    return TessLine.of(0, x.denominator, -x.numerator)


def cusp_segments() -> Dict[str, List[Tuple[str, Fraction]]]:
    """Per cusp class, the pillow geodesics entering it and their positions on a width-2 horocycle."""
    segments: Dict[str, List[Tuple[str, Fraction]]] = {}
    for cusp in CUSP_CLASSES:
        frame = _CUSP_FRAMES[cusp]
        segments[cusp] = [(gamma2_class(_vertical_line(x).act(frame)), x) for x in _CUSP_POSITIONS]
    return segments


def in_gamma2(g: Matrix) -> bool:
    p, q, r, s = g
    return p * s - q * r == 1 and q % 2 == 0 and r % 2 == 0


@dataclass(frozen=True)
class LedgerEntry:
    """One aggregated group of terms: ``value`` = ``weight`` × ``datum``."""

    kind: str
    first: str
    second: str
    weight: float
    datum: float
    count: int
    value: float


@dataclass(frozen=True)
class PairingTermLedger:
    entries: Tuple[LedgerEntry, ...]
    reduced_total: float
    cusp_total: float
    intersection_total: float
    ultraparallel_total: float
    bracket: float
    value: float
    cutoff: float
    tail_bound: float


def _weights(weights: Mapping[str, float], label: str) -> Dict[str, float]:
    unknown = sorted(set(weights) - set(GAMMA2_NAMES))
    if unknown:
        raise MissingWeight(f"{label}: unknown pillow geodesic(s) {', '.join(unknown)}")
    return {name: float(weights.get(name, 0.0)) for name in GAMMA2_NAMES}


def _check_balanced(weights: Mapping[str, float], label: str, tol: float) -> None:
    for cusp, segments in cusp_segments().items():
        total = math.fsum(weights[name] for name, _ in segments)
        if abs(total) > tol:
            raise Unbalanced(f"{label}: weights sum to {total!r} at cusp {cusp}")


def _cusp_datum(first: str, second: str, segments: Mapping[str, List[Tuple[str, Fraction]]]) -> float:
    terms = []
    for entries in segments.values():
        for name1, x1 in entries:
            if name1 != first:
                continue
            for name2, x2 in entries:
                if name2 == second:
                    a = (abs(x1 - x2) / 2) % 1
                    terms.append(math.log(lambda_fn(float(a))))
    return math.fsum(terms)


def shpr_pairing(
    first: Mapping[str, float],
    second: Mapping[str, float],
    cutoff: float,
    group: str = "gamma2",
    threads: int = 1,
    tol: float = 1e-9,
) -> PairingTermLedger:
    """Pairing of the gradients of two balanced combinations of pillow geodesics.

    The bracket collects, over ordered pairs (j, k) with weight 𝔞_j 𝔟_k,
    the reduced-length terms red + 2 for j = k, the log λ terms of pairs of
    segments at each cusp, R(cos θ) for each lift of k crossing a fixed
    lift of j and R(cosh d) for each lift of k ultraparallel to it with
    cosh d <= cutoff. The pairing value is (2/π) times the bracket. For
    σ = a + b + c - α - β - γ the bracket converges to SIGMA_BRACKET_LIMIT,
    not to zero.

    Raises:
        UnsupportedGroup: ``group`` is not ``gamma2``.
        MissingWeight: an unknown geodesic name.
        Unbalanced: a weight system does not sum to zero at some cusp.
        CutoffTooSmall: cutoff < 10.
    """
    if group != "gamma2":
        raise UnsupportedGroup(f"pairing geometry is only available for gamma2, not {group!r}")
    if cutoff < 10:
        raise CutoffTooSmall(f"cutoff {cutoff} is below 10")
    wa, wb = _weights(first, "A"), _weights(second, "B")
    _check_balanced(wa, "A", tol)
    _check_balanced(wb, "B", tol)
    segments = cusp_segments()
    entries: List[LedgerEntry] = []

    for name in GAMMA2_NAMES:
        w = wa[name] * wb[name]
        if w:
            datum = line_reduced_length(GAMMA2_LIFTS[name]) + 2.0
            entries.append(LedgerEntry("reduced", name, name, w, datum, 1, w * datum))

    for j in GAMMA2_NAMES:
        for k in GAMMA2_NAMES:
            w = wa[j] * wb[k]
            if w:
                datum = _cusp_datum(j, k, segments)
                entries.append(LedgerEntry("cusp", j, k, w, datum, 1, w * datum))

    neighbourhoods: Dict[Tuple[str, str], List[NearbyLine]] = {}
    for kind in (TWO_LINE, THREE_TWO_THREE_LINE):
        ref = reference_line(kind)
        neighbourhoods[(kind, "intersecting")] = lines_near(ref, 1.0, "intersecting", threads=threads)
        neighbourhoods[(kind, "ultraparallel")] = lines_near(ref, cutoff, "ultraparallel", threads=threads)

    tail = 0.0
    max_b = max(abs(v) for v in wb.values())
    for j in GAMMA2_NAMES:
        if not wa[j]:
            continue
        lift = GAMMA2_LIFTS[j]
        frame = mat_mul(canonical_frame(lift), mat_inv(canonical_frame(reference_line(lift.kind))))
        for which, label in (("intersecting", "intersection"), ("ultraparallel", "ultraparallel")):
            sums: Dict[str, CompensatedSum] = {k: CompensatedSum() for k in GAMMA2_NAMES}
            counts = {k: 0 for k in GAMMA2_NAMES}
            outer = 0
            for item in neighbourhoods[(lift.kind, which)]:
                k = gamma2_class(item.line.act(frame))
                if wb[k]:
                    sums[k].add(R(item.relation.value))
                    counts[k] += 1
                if item.relation.value > cutoff / 2.0:
                    outer += 1
            for k in GAMMA2_NAMES:
                if counts[k]:
                    w = wa[j] * wb[k]
                    datum = sums[k].value
                    entries.append(LedgerEntry(label, j, k, w, datum, counts[k], w * datum))
            if which == "ultraparallel":
                tail += abs(wa[j]) * max_b * _tail_estimate(outer, cutoff)

    def total(kind: str) -> float:
        return math.fsum(e.value for e in entries if e.kind == kind)

    reduced, cusp = total("reduced"), total("cusp")
    crossing, ultra = total("intersection"), total("ultraparallel")
    bracket = math.fsum((reduced, cusp, crossing, ultra))
    logger.info(
        "pairing: reduced %.6f cusp %.6f intersection %.6f ultraparallel %.6f", reduced, cusp, crossing, ultra
    )
    return PairingTermLedger(
        entries=tuple(entries),
        reduced_total=reduced,
        cusp_total=cusp,
        intersection_total=crossing,
        ultraparallel_total=ultra,
        bracket=bracket,
        value=2.0 / math.pi * bracket,
        cutoff=cutoff,
        tail_bound=2.0 / math.pi * tail,
    )


# --- crossings of an ideal geodesic with a closed one -------------------------------


def intersection_angle(first: TessLine, second: GeodesicLine) -> float:
    """cos of the counterclockwise angle from ``first`` to ``second`` at their crossing."""
    return line_angle_cosine(first.geodesic(), second)


def _lines_in_ball(radius: float) -> List[TessLine]:
    """Tessellation lines passing within hyperbolic distance ``radius`` of i."""
    # sinh d(i, line) = |a + c| / sqrt(D); with m = a + c, t = a - c: b² + t² = D + m²
    found = set()
    for disc in (1, 4):
        limit = int(math.floor(math.sqrt(disc) * math.sinh(radius))) + 1
        for m in range(-limit, limit + 1):
            rhs = disc + m * m
            for b in range(-math.isqrt(rhs), math.isqrt(rhs) + 1):
                t2 = rhs - b * b
                t = math.isqrt(t2)
                if t * t != t2:
                    continue
                for ts in {t, -t}:
                    if (m + ts) % 2:
                        continue
                    a, c = (m + ts) // 2, (m - ts) // 2
                    if _primitive(a, b, c):
                        found.add(TessLine(*_normalized(a, b, c)))
    return sorted(found)


def _distance_from_i(z: complex) -> float:
    return math.acosh(1.0 + abs(z - 1j) ** 2 / (2.0 * z.imag))


@dataclass(frozen=True)
class Crossing:
    line: TessLine
    point: complex
    cosine: float


@dataclass(frozen=True)
class CosineSum:
    value: float
    crossings: Tuple[Crossing, ...]
    translation_length: float
    flagged: bool


def period_start(axis: GeodesicLine, ell: float, offset: float) -> float:
    """Start, as log of the height after ``to_imaginary_axis(axis)``, of the cut-out period.

    The nearest point of the axis to i sits at log|w| for w the image of i.
    """
    nearest = math.log(abs(to_imaginary_axis(axis)(1j)))
    shift = (offset + 0.5) % 1.0 - 0.5
    return nearest + (shift - 0.5) * ell


def _hyperbolic_in_gamma2(beta: Matrix) -> MoebiusMap:
    if not in_gamma2(beta):
        raise UnsupportedGroup(f"{beta} is not an element of gamma2")
    g = MoebiusMap.from_entries(*(float(x) for x in beta))
    if g.kind() != "hyperbolic":
        raise TessellationError(f"{beta} is not hyperbolic")
    return g


def intersection_cos_sum(
    alpha: str, beta: Matrix, group: str = "gamma2", strict: bool = False, offset: float = 0.1234567
) -> CosineSum:
    """Σ cos θ over the crossings of the pillow geodesic ``alpha`` with the closed geodesic of ``beta``.

    One period of the axis of ``beta`` is cut out around the point of the
    axis nearest i, shifted along the axis by ``offset`` periods (taken
    modulo 1 into [-1/2, 1/2)); every lift of ``alpha`` crossing it
    contributes the cosine of the counterclockwise angle from the lift to
    the axis. The window never leaves distance d(i, axis) + ℓ of i.

    Raises:
        UnsupportedGroup: ``group`` is not ``gamma2`` or ``beta`` is not in Γ(2).
        MissingWeight: unknown geodesic name.
        TessellationError: ``beta`` is not hyperbolic.
        NoIntersections: no crossing and ``strict`` is set.
    """
    if group != "gamma2":
        raise UnsupportedGroup(f"crossing geometry is only available for gamma2, not {group!r}")
    if alpha not in GAMMA2_LIFTS:
        raise MissingWeight(f"unknown pillow geodesic {alpha!r}")
    g = _hyperbolic_in_gamma2(beta)
    ell = g.translation_length()
    axis = g.axis()
    to_axis = to_imaginary_axis(axis)
    back = to_axis.inverse()
    s0 = period_start(axis, ell, offset)
    ends = (back(1j * math.exp(s0)), back(1j * math.exp(s0 + ell)))
    radius = max(_distance_from_i(z) for z in ends) + 1e-9

    crossings = []
    for line in _lines_in_ball(radius):
        if gamma2_class(line) != alpha:
            continue
        geo = line.geodesic()
        frame = to_imaginary_axis(geo)
        k1, k2 = frame(axis.start), frame(axis.end)
        if not k1 * k2 < 0:
            continue
        point = frame.inverse()(1j * math.sqrt(-k1 * k2))
        s = math.log(to_axis(point).imag)
        if s0 <= s < s0 + ell:
            crossings.append(Crossing(line, point, intersection_angle(line, axis)))
    crossings.sort(key=lambda x: x.line.triple)
    if not crossings:
        if strict:
            raise NoIntersections(f"{alpha} does not meet the axis of {beta}")
        logger.warning("%s does not meet the axis of %s", alpha, beta)
    value = CompensatedSum().extend(x.cosine for x in crossings).value
    return CosineSum(value=value, crossings=tuple(crossings), translation_length=ell, flagged=not crossings)
