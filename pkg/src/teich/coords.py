"""Penner coordinates on decorated Teichmüller space.

λ-lengths live on edges, h-lengths on corners, shear coordinates on
edges again. All three are computed here from a ``LambdaAssignment``,
which comes in two flavours:

* numeric: positive ints, Fractions or floats. With rational input the
  multiplicative identities (h-lengths, coupling, Ptolemy) are exact;
* formal-log: exact rationals ``x_e`` standing for ``log λ_e``. Every
  logarithmic quantity (shears, lengths of weight systems) is then an
  exact rational, so linear identities can be checked without rounding.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Tuple

from teich.errors import CoordinateError, MissingWeight, NonpositiveLambda, TriangulationError
from teich.surface import (
    Corner,
    IdealTriangulation,
    Number,
    WeightSystem,
    balance_matrix,
    flip,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LambdaAssignment:
    """λ-lengths per edge, or their formal logarithms when ``log_mode`` is set."""

    values: Mapping[str, Number]
    log_mode: bool = False

    def log(self, edge: str) -> Number:
        """log λ_e: exact in formal-log mode, a float otherwise."""
        value = self.values[edge]
        if self.log_mode:
            return value
        return math.log(value)

    def value(self, edge: str) -> Number:
        value = self.values[edge]
        if self.log_mode:
            return math.exp(value)
        return value


@dataclass(frozen=True)
class HLengths:
    """h-lengths per corner (logarithms of them in formal-log mode)."""

    values: Mapping[Corner, Number]
    log_mode: bool = False

    def __getitem__(self, corner: Corner) -> Number:
        return self.values[corner]


@dataclass(frozen=True)
class ShearCoords:
    """Shear coordinate per edge."""

    values: Mapping[str, Number]
    log_mode: bool = False

    def __getitem__(self, edge: str) -> Number:
        return self.values[edge]


def lambda_assignment(tri: IdealTriangulation, values: Mapping[str, Number]) -> LambdaAssignment:
    """Validate and wrap numeric λ-lengths.

    Raises:
        MissingWeight: an edge has no λ-length.
        NonpositiveLambda: some λ_e <= 0.
    """
    _require(tri, values)
    for edge in tri.edges:
        if not values[edge] > 0:
            raise NonpositiveLambda(f"lambda-length of {edge!r} is {values[edge]!r}; must be positive")
    return LambdaAssignment(values=dict(values), log_mode=False)


def formal_log_assignment(tri: IdealTriangulation, logs: Mapping[str, Number]) -> LambdaAssignment:
    """Wrap exact logarithms x_e = log λ_e (any rational is admissible)."""
    _require(tri, logs)
    return LambdaAssignment(values={e: Fraction(logs[e]) for e in tri.edges}, log_mode=True)


def _require(tri: IdealTriangulation, values: Mapping[str, Number]) -> None:
    missing = [e for e in tri.edges if e not in values]
    if missing:
        raise MissingWeight(f"no lambda-length for edge(s) {', '.join(missing)}")


def _checked(tri: IdealTriangulation, lam: LambdaAssignment) -> LambdaAssignment:
    _require(tri, lam.values)
    if not lam.log_mode:
        for edge in tri.edges:
            if not lam.values[edge] > 0:
                raise NonpositiveLambda(f"lambda-length of {edge!r} is {lam.values[edge]!r}; must be positive")
    return lam


def h_lengths(tri: IdealTriangulation, lam: LambdaAssignment) -> HLengths:
    """h at corner (t, i) is λ of the opposite side over λ of the two adjacent sides."""
    lam = _checked(tri, lam)
    values: Dict[Corner, Number] = {}
    for t, sides in enumerate(tri.triangles):
        for i in range(3):
            adj1, adj2, opp = sides[i], sides[(i + 1) % 3], sides[(i + 2) % 3]
            if lam.log_mode:
                values[(t, i)] = lam.values[opp] - lam.values[adj1] - lam.values[adj2]
            else:
                values[(t, i)] = lam.values[opp] / (lam.values[adj1] * lam.values[adj2])
    return HLengths(values=values, log_mode=lam.log_mode)


def crossings(tri: IdealTriangulation, edge: str) -> Tuple[Tuple[Corner, Corner], Tuple[Corner, Corner]]:
    """The two link crossings of ``edge`` as (corner before, corner after) pairs.

    Raises:
        TriangulationError: ``edge`` is not an edge of ``tri``.
    """
    if edge not in tri.edges:
        raise TriangulationError(f"unknown edge {edge!r}; edges: {', '.join(tri.edges)}")
    found = []
    for link in tri.links:
        size = len(link)
        for k, end in enumerate(link.ends):
            if end.edge == edge:
                found.append((link.corners[k], link.corners[(k + 1) % size]))
    return found[0], found[1]


def coupling_residuals(tri: IdealTriangulation, lam: LambdaAssignment) -> Dict[str, Tuple[Number, Number]]:
    """Both sides of the coupling equation per edge.

    With crossings c1 -> c1' and c2 -> c2' of the edge, the pair returned is
    (h_c1 h_c2', h_c2 h_c1'); the equation holds when the two agree. In
    formal-log mode products become sums.
    """
    h = h_lengths(tri, lam)
    residuals: Dict[str, Tuple[Number, Number]] = {}
    for edge in tri.edges:
        (c1, c1p), (c2, c2p) = crossings(tri, edge)
        if lam.log_mode:
            residuals[edge] = (h[c1] + h[c2p], h[c2] + h[c1p])
        else:
            residuals[edge] = (h[c1] * h[c2p], h[c2] * h[c1p])
    return residuals


def shear_functional(tri: IdealTriangulation, edge: str) -> Dict[str, int]:
    """σ_e as integer coefficients of the log λ's.

    Each slot (t, k) holding the edge contributes +1 for the side before it
    in the triangle and -1 for the side after it.
    """
    if edge not in tri.slots:
        raise MissingWeight(f"unknown edge {edge!r}")
    coeffs = {e: 0 for e in tri.edges}
    for t, k in tri.slots[edge]:
        sides = tri.triangles[t]
        coeffs[sides[(k - 1) % 3]] += 1
        coeffs[sides[(k + 1) % 3]] -= 1
    return coeffs


def shear_coords(tri: IdealTriangulation, lam: LambdaAssignment) -> ShearCoords:
    """Shear coordinate σ_e = log(λ_b λ_d / (λ_a λ_c)) for every edge."""
    lam = _checked(tri, lam)
    values: Dict[str, Number] = {}
    for edge in tri.edges:
        coeffs = shear_functional(tri, edge)
        if lam.log_mode:
            values[edge] = sum((c * lam.values[e] for e, c in coeffs.items() if c), Fraction(0))
        elif all(isinstance(lam.values[e], (int, Fraction)) for e, c in coeffs.items() if c):
            ratio = Fraction(1)
            for e, c in coeffs.items():
                if c:
                    ratio *= Fraction(lam.values[e]) ** c
            values[edge] = math.log(ratio)
        else:
            values[edge] = math.fsum(c * math.log(lam.values[e]) for e, c in coeffs.items() if c)
    return ShearCoords(values=values, log_mode=lam.log_mode)


def cusp_shear_sums(tri: IdealTriangulation, shears: Mapping[str, Number]) -> list:
    """Sum of shears over the side-ends entering each cusp."""
    sums = []
    for link in tri.links:
        total: Number = 0
        for end in link.ends:
            total += shears[end.edge]
        sums.append(total)
    return sums


def ptolemy_flip(
    tri: IdealTriangulation, lam: LambdaAssignment, edge: str
) -> Tuple[IdealTriangulation, LambdaAssignment]:
    """Flip ``edge`` and update its λ-length by the Ptolemy relation.

    For ``[e, p, q]`` and ``[e, p', q']`` the new diagonal has
    λ'_e = (λ_p λ_p' + λ_q λ_q') / λ_e; other λ's are unchanged.

    Raises:
        SelfFolded: the flip would create a self-folded triangle.
        NonpositiveLambda: invalid input λ.
        CoordinateError: formal-log input (the relation is not log-linear).
    """
    lam = _checked(tri, lam)
    if lam.log_mode:
        raise CoordinateError("Ptolemy flips need numeric lambda-lengths, not formal logarithms")
    new_tri = flip(tri, edge)
    (t, i), (u, j) = tri.slots[edge]
    p, q = tri.triangles[t][(i + 1) % 3], tri.triangles[t][(i + 2) % 3]
    p2, q2 = tri.triangles[u][(j + 1) % 3], tri.triangles[u][(j + 2) % 3]
    v = lam.values
    values = dict(v)
    values[edge] = (v[p] * v[p2] + v[q] * v[q2]) / v[edge]
    logger.debug("flipped %s: %r -> %r", edge, v[edge], values[edge])
    return new_tri, LambdaAssignment(values=values, log_mode=False)


def rescale_decoration(
    tri: IdealTriangulation, lam: LambdaAssignment, cusp: int, t: Number
) -> LambdaAssignment:
    """Move the horocycle at ``cusp`` by hyperbolic distance ``t``.

    Each end of an edge at the cusp multiplies its λ-length by e^{t/2}
    (adds t/2 to its logarithm in formal-log mode).
    """
    if not 0 <= cusp < tri.punctures:
        raise CoordinateError(f"cusp index {cusp} out of range for {tri.punctures} cusps")
    lam = _checked(tri, lam)
    counts = balance_matrix(tri)[cusp]
    values = dict(lam.values)
    for k, edge in enumerate(tri.edges):
        ends = int(counts[k])
        if not ends:
            continue
        if lam.log_mode:
            values[edge] = values[edge] + Fraction(t) / 2 * ends
        else:
            values[edge] = values[edge] * math.exp(float(t) / 2 * ends)
    return LambdaAssignment(values=values, log_mode=lam.log_mode)


def balanced_length(tri: IdealTriangulation, lam: LambdaAssignment, weights: WeightSystem) -> Number:
    """L(w) = Σ 2 w_e log λ_e.

    Raises:
        MissingWeight: a weight or λ-length is missing.
        NonpositiveLambda: some λ_e <= 0.
    """
    lam = _checked(tri, lam)
    missing = [e for e in tri.edges if e not in weights]
    if missing:
        raise MissingWeight(f"no weight for edge(s) {', '.join(missing)}")
    if lam.log_mode and all(isinstance(weights[e], (int, Fraction)) for e in tri.edges):
        return sum((2 * Fraction(weights[e]) * lam.values[e] for e in tri.edges), Fraction(0))
    return math.fsum(2 * float(weights[e]) * float(lam.log(e)) for e in tri.edges)
