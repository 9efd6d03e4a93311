"""Ideal triangulations of punctured surfaces.

A triangulation is a list of triangles, each a counterclockwise triple of
edge labels. Every label occurs in exactly two slots, and gluing the two
slots carrying the same label (orientation-reversingly) yields the
surface. From that list alone this module derives the cusps, the genus,
the exchange matrix, and the cusp balance conditions on edge weights.

Conventions used throughout the package:

* slot ``(t, i)`` is side ``i`` of triangle ``t``, running from vertex
  ``v_i`` to vertex ``v_{i+1}`` counterclockwise;
* corner ``(t, i)`` sits at ``v_{i+1}``, between side ``i`` and side
  ``i+1`` and opposite side ``i+2``. Going counterclockwise about the
  vertex one meets side ``i+1`` first, then side ``i``;
* the link of a cusp is walked by crossing side ``i`` of corner ``(t, i)``
  into its partner slot ``(t', j)`` and continuing at corner
  ``(t', j-1)``.
"""

from __future__ import annotations

import logging
import random
from collections import Counter, deque
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp

from teich.errors import (
    EdgeDegree,
    EmptyInput,
    MissingWeight,
    NonsurfaceGluing,
    SelfFolded,
)

logger = logging.getLogger(__name__)

Number = Union[int, Fraction, float]
Slot = Tuple[int, int]
Corner = Tuple[int, int]
WeightSystem = Mapping[str, Number]


@dataclass(frozen=True)
class SideEnd:
    """One end of an edge, seen from the cusp it enters.

    ``slot`` is the slot the link walk crosses; the end is the head of the
    side as oriented in that slot.
    """

    edge: str
    slot: Slot


@dataclass(frozen=True)
class CuspLink:
    """Cyclic counterclockwise walk around one cusp.

    ``ends[k]`` is crossed between ``corners[k]`` and ``corners[k+1]``.
    """

    cusp: int
    corners: Tuple[Corner, ...]
    ends: Tuple[SideEnd, ...]

    def __len__(self) -> int:
        return len(self.ends)

    @property
    def edge_sequence(self) -> Tuple[str, ...]:
        return tuple(end.edge for end in self.ends)


@dataclass(frozen=True)
class IdealTriangulation:
    """A validated ideal triangulation. Build one with ``validate``."""

    triangles: Tuple[Tuple[str, str, str], ...]
    edges: Tuple[str, ...]
    slots: Mapping[str, Tuple[Slot, Slot]]
    links: Tuple[CuspLink, ...]
    genus: int
    punctures: int

    @property
    def signature(self) -> Tuple[int, int]:
        return (self.genus, self.punctures)

    def side(self, slot: Slot) -> str:
        t, i = slot
        return self.triangles[t][i % 3]

    def partner(self, slot: Slot) -> Slot:
        """Return the other slot glued to ``slot``."""
        a, b = self.slots[self.side(slot)]
        return b if a == (slot[0], slot[1] % 3) else a

    def cusp_of_corner(self, corner: Corner) -> int:
        return self._corner_cusp[(corner[0], corner[1] % 3)]

    @cached_property
    def _corner_cusp(self) -> Dict[Corner, int]:
        return {c: link.cusp for link in self.links for c in link.corners}

    def edge_index(self, edge: str) -> int:
        return self.edges.index(edge)

    def canonical(self) -> Tuple[Tuple[str, str, str], ...]:
        """Rotation-minimal triangles, sorted; equal for equal gluings."""
        rotated = []
        for tri in self.triangles:
            rotations = [tuple(tri[k:] + tri[:k]) for k in range(3)]
            rotated.append(min(rotations))
        return tuple(sorted(rotated))


def validate(triangles: Sequence[Sequence[str]]) -> IdealTriangulation:
    """Validate a gluing and derive its cusps and signature.

    Args:
        triangles: counterclockwise label triples.

    Returns:
        The validated ``IdealTriangulation``.

    Raises:
        EmptyInput: no triangles.
        NonsurfaceGluing: a triangle is not a triple, the gluing is
            disconnected, or the Euler characteristic is inconsistent.
        EdgeDegree: a label does not occur exactly twice.
        SelfFolded: both occurrences of a label lie in one triangle.
    """
    if not triangles:
        raise EmptyInput("triangulation has no triangles")

    tris: List[Tuple[str, str, str]] = []
    for t, tri in enumerate(triangles):
        if len(tri) != 3:
            raise NonsurfaceGluing(
                f"triangle {t} has {len(tri)} sides; an ideal triangle has three"
            )
        tris.append((str(tri[0]), str(tri[1]), str(tri[2])))

    counts = Counter(label for tri in tris for label in tri)
    for label, count in counts.items():
        if count != 2:
            raise EdgeDegree(f"edge {label!r} occurs {count} times, expected 2")

    edges: List[str] = []
    occurrences: Dict[str, List[Slot]] = {}
    for t, tri in enumerate(tris):
        for i, label in enumerate(tri):
            if label not in occurrences:
                edges.append(label)
                occurrences[label] = []
            occurrences[label].append((t, i))
    for label, (first, second) in occurrences.items():
        if first[0] == second[0]:
            raise SelfFolded(
                f"edge {label!r} occupies two sides of triangle {first[0]}"
            )
    slots = {label: (occ[0], occ[1]) for label, occ in occurrences.items()}

    _check_connected(tris, slots)
    links = _walk_cusps(tris, slots)

    n_tri, n_edge, n_cusp = len(tris), len(edges), len(links)
    euler = n_tri - n_edge + n_cusp
    if euler > 2 or (2 - euler) % 2:
        raise NonsurfaceGluing(f"Euler characteristic {euler} is not that of a closed orientable surface")
    genus = (2 - euler) // 2
    if n_edge != 6 * genus - 6 + 3 * n_cusp or n_tri != 4 * genus - 4 + 2 * n_cusp:
        raise NonsurfaceGluing(
            f"counts T={n_tri}, E={n_edge} do not match genus {genus} with {n_cusp} cusps"
        )

    logger.debug("validated triangulation: g=%d n=%d E=%d", genus, n_cusp, n_edge)
    return IdealTriangulation(
        triangles=tuple(tris),
        edges=tuple(edges),
        slots=slots,
        links=tuple(links),
        genus=genus,
        punctures=n_cusp,
    )


def _check_connected(tris: Sequence[Tuple[str, str, str]], slots: Mapping[str, Tuple[Slot, Slot]]) -> None:
    seen = {0}
    queue = deque([0])
    while queue:
        t = queue.popleft()
        for label in tris[t]:
            for other, _ in slots[label]:
                if other not in seen:
                    seen.add(other)
                    queue.append(other)
    if len(seen) != len(tris):
        missing = sorted(set(range(len(tris))) - seen)
        raise NonsurfaceGluing(f"gluing is disconnected; triangles {missing} unreachable from 0")


def _walk_cusps(
    tris: Sequence[Tuple[str, str, str]], slots: Mapping[str, Tuple[Slot, Slot]]
) -> List[CuspLink]:
    def partner(slot: Slot) -> Slot:
        a, b = slots[tris[slot[0]][slot[1]]]
        return b if a == slot else a

    links: List[CuspLink] = []
    visited = set()
    for t in range(len(tris)):
        for i in range(3):
            if (t, i) in visited:
                continue
            corners: List[Corner] = []
            ends: List[SideEnd] = []
            corner = (t, i)
            while corner not in visited:
                visited.add(corner)
                corners.append(corner)
                ct, ci = corner
                ends.append(SideEnd(edge=tris[ct][ci], slot=corner))
                pt, pj = partner(corner)
                corner = (pt, (pj - 1) % 3)
            links.append(CuspLink(cusp=len(links), corners=tuple(corners), ends=tuple(ends)))
    return links


def cusp_links(tri: IdealTriangulation) -> List[CuspLink]:
    """Counterclockwise links of every cusp, in cusp order."""
    return list(tri.links)


def epsilon_matrix(tri: IdealTriangulation) -> np.ndarray:
    """Exchange matrix ε indexed by ``tri.edges``.

    At each corner, the side met first counterclockwise gets +1 towards the
    side met second, and the entry is antisymmetrized.
    """
    size = len(tri.edges)
    index = {e: k for k, e in enumerate(tri.edges)}
    eps = np.zeros((size, size), dtype=np.int64)
    for sides in tri.triangles:
        for i in range(3):
            first, second = index[sides[(i + 1) % 3]], index[sides[i]]
            eps[first, second] += 1
            eps[second, first] -= 1
    return eps


def balance_matrix(tri: IdealTriangulation) -> np.ndarray:
    """Cusp-by-edge incidence: entry (c, e) counts the ends of e at cusp c."""
    index = {e: k for k, e in enumerate(tri.edges)}
    incidence = np.zeros((tri.punctures, len(tri.edges)), dtype=np.int64)
    for link in tri.links:
        for end in link.ends:
            incidence[link.cusp, index[end.edge]] += 1
    return incidence


def balanced_basis(tri: IdealTriangulation) -> List[Dict[str, Fraction]]:
    """Exact rational basis of the balanced weight systems.

    The kernel of the balance matrix has dimension 6g - 6 + 2n.
    """
    matrix = sp.Matrix(balance_matrix(tri).tolist())
    basis = []
    for vec in matrix.nullspace():
        basis.append({e: Fraction(int(v.p), int(v.q)) for e, v in zip(tri.edges, vec)})
    expected = 6 * tri.genus - 6 + 2 * tri.punctures
    if len(basis) != expected:
        logger.warning("balanced kernel has dimension %d, expected %d", len(basis), expected)
    return basis


def cusp_sums(tri: IdealTriangulation, weights: WeightSystem) -> List[Number]:
    """Per-cusp sums of the weights over the side-ends entering each cusp.

    Raises:
        MissingWeight: an edge has no weight.
    """
    _require_weights(tri, weights)
    sums: List[Number] = []
    for link in tri.links:
        total: Number = 0
        for end in link.ends:
            total += weights[end.edge]
        sums.append(total)
    return sums


def is_balanced(tri: IdealTriangulation, weights: WeightSystem, tol: float = 1e-9) -> bool:
    """True when every cusp sum vanishes (exactly for rationals, within ``tol`` for floats)."""
    for total in cusp_sums(tri, weights):
        if isinstance(total, float):
            if abs(total) > tol:
                return False
        elif total != 0:
            return False
    return True


def _require_weights(tri: IdealTriangulation, weights: WeightSystem) -> None:
    missing = [e for e in tri.edges if e not in weights]
    if missing:
        raise MissingWeight(f"no weight for edge(s) {', '.join(missing)}")


def flip(tri: IdealTriangulation, edge: str) -> IdealTriangulation:
    """Combinatorial diagonal flip of ``edge``.

    With ``edge`` at slot ``(t, i)`` of ``[e, p, q]`` and at slot ``(t', j)``
    of ``[e, p', q']`` (rotated so e comes first), triangle ``t`` becomes
    ``[q, p', e]`` and triangle ``t'`` becomes ``[q', p, e]``.

    Raises:
        MissingWeight: unknown edge label.
        SelfFolded: the flip would create a self-folded triangle.
    """
    if edge not in tri.slots:
        raise MissingWeight(f"unknown edge {edge!r}")
    (t, i), (u, j) = tri.slots[edge]
    p, q = tri.triangles[t][(i + 1) % 3], tri.triangles[t][(i + 2) % 3]
    p2, q2 = tri.triangles[u][(j + 1) % 3], tri.triangles[u][(j + 2) % 3]
    if p == q2 or q == p2:
        raise SelfFolded(f"flipping {edge!r} would fold a triangle onto itself")
    new = list(tri.triangles)
    new[t] = (q, p2, edge)
    new[u] = (q2, p, edge)
    return validate(new)


def flip_quadrilateral(tri: IdealTriangulation, edge: str) -> Tuple[str, str, str, str]:
    """Sides (p, q, p', q') of the quadrilateral around ``edge``, as used by ``flip``."""
    (t, i), (u, j) = tri.slots[edge]
    return (
        tri.triangles[t][(i + 1) % 3],
        tri.triangles[t][(i + 2) % 3],
        tri.triangles[u][(j + 1) % 3],
        tri.triangles[u][(j + 2) % 3],
    )


def legal_flips(tri: IdealTriangulation) -> List[str]:
    """Edges whose flip keeps every triangle non-self-folded."""
    legal = []
    for e in tri.edges:
        p, q, p2, q2 = flip_quadrilateral(tri, e)
        if p != q2 and q != p2:
            legal.append(e)
    return legal


def flip_variants(
    tri: IdealTriangulation,
    count: int,
    rng: Optional[random.Random] = None,
    max_steps: int = 6,
) -> List[IdealTriangulation]:
    """Random triangulations of the same surface reached by legal flips.

    Each variant applies between one and ``max_steps`` random legal flips to
    ``tri``. Surfaces with no legal flip (the thrice-punctured sphere)
    yield copies of ``tri``.
    """
    rng = rng or random.Random(0)
    variants: List[IdealTriangulation] = []
    for _ in range(count):
        current = tri
        for _ in range(rng.randint(1, max_steps)):
            options = legal_flips(current)
            if not options:
                break
            current = flip(current, rng.choice(options))
        variants.append(current)
    return variants
