"""Developing maps into the upper half-plane.

An ideal point together with a horocycle is stored as a vector ``v`` in
ℝ²: ``(x, y)`` with ``y != 0`` is the point ``x/y`` carrying the horocycle
of Euclidean diameter ``1/y²``, and ``(x, 0)`` is ∞ with the horocycle at
height ``x²``. The λ-length between two decorated points is then
``|det(v1, v2)|`` and SL(2,ℝ) acts linearly. Shear-only developments use
the same vectors with the scale ignored.

Triangles are placed breadth-first from triangle 0, whose vertices
``(v0, v1, v2)`` sit at ``(-1, 0, ∞)``. Across a side the new vertex is
placed so that the shear of the developed quadrilateral,
``log(|X-P||Z-Q| / (|Q-X||P-Z|))`` for the side ``P -> Q``, the far vertex
``X`` of the placed triangle and the new vertex ``Z``, equals the input.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from teich.coords import LambdaAssignment, lambda_assignment, shear_coords
from teich.errors import (
    CoincidentPoints,
    GeometryError,
    IncompleteDevelopment,
    MissingWeight,
    NonpositiveParam,
    NumericBlowup,
    UndecoratedCusp,
)
from teich.hyperbolic import INF, MoebiusMap
from teich.surface import Corner, IdealTriangulation, Number, Slot

logger = logging.getLogger(__name__)

_BLOWUP = 1e150


@dataclass(frozen=True)
class Horocycle:
    """Horocycle based at ``base``; ``size`` is its diameter, or its height when based at ∞."""

    base: float
    size: float

    def __post_init__(self) -> None:
        if not self.size > 0:
            raise NonpositiveParam(f"horocycle size must be positive, got {self.size!r}")

    @property
    def at_infinity(self) -> bool:
        return math.isinf(self.base)

    @classmethod
    def from_vector(cls, v: np.ndarray, tol: float = 1e-14) -> "Horocycle":
        x, y = float(v[0]), float(v[1])
        if abs(y) <= tol * abs(x):
            return cls(INF, x * x)
        return cls(x / y, 1.0 / (y * y))


@dataclass
class PlacedTriangle:
    """One developed copy of a triangle."""

    triangle: int
    vertices: Tuple[np.ndarray, np.ndarray, np.ndarray]
    depth: int
    parent: Optional[int] = None
    entry_slot: Optional[int] = None

    def point(self, k: int) -> float:
        x, y = self.vertices[k % 3]
        if abs(y) <= 1e-14 * abs(x):
            return INF
        return float(x / y)

    def points(self) -> Tuple[float, float, float]:
        return (self.point(0), self.point(1), self.point(2))

    def placement(self) -> MoebiusMap:
        """The map sending the model triangle (0, 1, ∞) to (v0, v1, v2)."""
        p, q, r = self.vertices
        coeffs = np.linalg.solve(np.column_stack((r, p)), q)
        m = np.column_stack((coeffs[0] * r, coeffs[1] * p))
        if not np.all(np.isfinite(m)) or not np.linalg.det(m) > 0:
            raise NumericBlowup(f"placement of triangle {self.triangle} is degenerate")
        return MoebiusMap.from_matrix(m)


@dataclass
class DecoratedRealization:
    """A depth-truncated development of a triangulated surface."""

    tri: IdealTriangulation
    shears: Mapping[str, float]
    nodes: List[PlacedTriangle]
    lambdas: Optional[Mapping[str, float]] = None
    base_triangle: int = 0
    depth: int = 0
    _first_copy: Dict[int, int] = field(default_factory=dict, repr=False)

    @property
    def decorated(self) -> bool:
        return self.lambdas is not None

    def copy_of(self, triangle: int) -> int:
        """Index of the shallowest developed copy of ``triangle``.

        Raises:
            IncompleteDevelopment: the triangle was never reached.
        """
        if triangle not in self._first_copy:
            raise IncompleteDevelopment(
                f"triangle {triangle} not reached at development depth {self.depth}"
            )
        return self._first_copy[triangle]

    def horocycle(self, node: int, k: int) -> Horocycle:
        if not self.decorated:
            raise UndecoratedCusp("development carries no horocycles; develop from lambda-lengths")
        return Horocycle.from_vector(self.nodes[node].vertices[k % 3])


def _det(u: np.ndarray, v: np.ndarray) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _check_vector(v: np.ndarray, where: str) -> np.ndarray:
    if not np.all(np.isfinite(v)) or float(np.max(np.abs(v))) > _BLOWUP:
        raise NumericBlowup(f"vertex placed {where} is not finite")
    return v


def _base_vertices(
    tri: IdealTriangulation, triangle: int, lam: Optional[Mapping[str, float]]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    v0, v1, v2 = np.array([-1.0, 1.0]), np.array([0.0, 1.0]), np.array([1.0, 0.0])
    if lam is None:
        return (v0 / math.sqrt(2.0), v1, v2)
    l0, l1, l2 = (float(lam[s]) for s in tri.triangles[triangle])
    return (
        v0 * math.sqrt(l0 * l2 / l1),
        v1 * math.sqrt(l0 * l1 / l2),
        v2 * math.sqrt(l1 * l2 / l0),
    )


def _cross(real: DecoratedRealization, node: PlacedTriangle, i: int) -> PlacedTriangle:
    """Develop the neighbour of ``node`` across its side ``i``."""
    tri = real.tri
    t = node.triangle
    u, j = tri.partner((t, i))
    P, Q, X = node.vertices[i % 3], node.vertices[(i + 1) % 3], node.vertices[(i + 2) % 3]
    base = _det(P, Q)
    if abs(base) < 1e-300:
        raise NumericBlowup(f"side {i} of a copy of triangle {t} has coincident endpoints")
    alpha, beta = np.linalg.solve(np.column_stack((P, Q)), X)
    where = f"across {tri.side((t, i))!r}"
    if real.lambdas is not None:
        lam_pz = float(real.lambdas[tri.triangles[u][(j + 1) % 3]])
        lam_qz = float(real.lambdas[tri.triangles[u][(j + 2) % 3]])
        a2 = math.copysign(lam_qz / abs(base), alpha)
        b2 = -math.copysign(lam_pz / abs(base), beta)
        Z = a2 * P + b2 * Q
    else:
        zeta = -math.exp(float(real.shears[tri.side((t, i))])) * alpha / beta
        Z = zeta * P + Q
        Z = Z / np.linalg.norm(Z)
    Z = _check_vector(Z, where)
    if abs(_det(Z, P)) < 1e-14 * np.linalg.norm(Z) * np.linalg.norm(P) or abs(_det(Z, Q)) < 1e-14 * np.linalg.norm(Z) * np.linalg.norm(Q):
        raise NumericBlowup(f"vertex placed {where} collides with an existing vertex")
    verts: List[np.ndarray] = [Z, Z, Z]
    verts[j] = Q
    verts[(j + 1) % 3] = P
    verts[(j + 2) % 3] = Z
    return PlacedTriangle(triangle=u, vertices=tuple(verts), depth=node.depth + 1, entry_slot=j)


def develop(
    tri: IdealTriangulation,
    shears: Optional[Mapping[str, Number]] = None,
    lam: Optional[LambdaAssignment] = None,
    depth: int = 4,
) -> DecoratedRealization:
    """Breadth-first development to combinatorial ``depth``.

    Exactly one of ``shears`` (arbitrary reals) or ``lam`` (numeric
    λ-lengths) is given. With λ-lengths every vertex carries a horocycle.

    Raises:
        MissingWeight: a shear or λ-length is missing, or neither is given.
        NumericBlowup: a developed vertex degenerates.
    """
    if (shears is None) == (lam is None):
        raise MissingWeight("develop needs exactly one of shears or lambda-lengths")
    if depth < 0:
        raise NonpositiveParam(f"depth must be >= 0, got {depth}")
    lambdas: Optional[Dict[str, float]] = None
    if lam is not None:
        lam = lambda_assignment(tri, lam.values) if not lam.log_mode else lam
        lambdas = {e: float(lam.value(e)) for e in tri.edges}
        shear_values = {e: float(v) for e, v in shear_coords(tri, lambda_assignment(tri, lambdas)).values.items()}
    else:
        missing = [e for e in tri.edges if e not in shears]
        if missing:
            raise MissingWeight(f"no shear for edge(s) {', '.join(missing)}")
        shear_values = {e: float(shears[e]) for e in tri.edges}

    real = DecoratedRealization(tri=tri, shears=shear_values, nodes=[], lambdas=lambdas, depth=depth)
    root = PlacedTriangle(triangle=0, vertices=_base_vertices(tri, 0, lambdas), depth=0)
    real.nodes.append(root)
    real._first_copy[0] = 0
    queue = deque([0])
    while queue:
        index = queue.popleft()
        node = real.nodes[index]
        if node.depth >= depth:
            continue
        for i in range(3):
            if i == node.entry_slot:
                continue
            child = _cross(real, node, i)
            child.parent = index
            real.nodes.append(child)
            real._first_copy.setdefault(child.triangle, len(real.nodes) - 1)
            queue.append(len(real.nodes) - 1)
    logger.debug("developed %d triangle copies to depth %d", len(real.nodes), depth)
    return real


def edge_mismatch(real: DecoratedRealization) -> float:
    """Largest disagreement between a copy and its parent on their shared ideal points.

    Both sides are recomputed through the placement maps, so this checks that
    the placements glue consistently.
    """
    worst = 0.0
    model = (0.0, 1.0, INF)
    for node in real.nodes:
        if node.parent is None:
            continue
        parent = real.nodes[node.parent]
        mine = node.placement()
        theirs = parent.placement()
        for k in (node.entry_slot, node.entry_slot + 1):
            x = mine(model[k % 3])
            pk = _matching_vertex(parent, node.vertices[k % 3])
            y = theirs(model[pk])
            worst = max(worst, _point_gap(x, y))
    return worst


def _matching_vertex(node: PlacedTriangle, v: np.ndarray) -> int:
    for k, w in enumerate(node.vertices):
        if w is v:
            return k
    raise GeometryError("copy does not share a vertex with its parent")


def _point_gap(x: float, y: float) -> float:
    if math.isinf(x) or math.isinf(y):
        if math.isinf(x) and math.isinf(y):
            return 0.0
        finite = y if math.isinf(x) else x
        return 1.0 / (1.0 + abs(finite))
    return abs(x - y) / max(1.0, abs(x), abs(y))


def _walk_link(real: DecoratedRealization, node: PlacedTriangle, corner: int) -> Tuple[MoebiusMap, PlacedTriangle]:
    """Go once around the cusp at corner ``(node.triangle, corner)``; return holonomy and final copy."""
    tri = real.tri
    start = node.placement()
    steps = len(tri.links[tri.cusp_of_corner((node.triangle, corner))])
    current, i = node, corner
    for _ in range(steps):
        nxt = _cross(real, current, i)
        i = (nxt.entry_slot - 1) % 3
        current = nxt
    if current.triangle != node.triangle or i != corner % 3:
        raise IncompleteDevelopment("cusp walk did not return to its starting corner")
    return current.placement() @ start.inverse(), current


def cusp_holonomy(real: DecoratedRealization, cusp: int) -> MoebiusMap:
    """Product of the gluing maps once around ``cusp``.

    Raises:
        IncompleteDevelopment: the cusp is unknown or its first corner's
            triangle was not developed.
    """
    if not 0 <= cusp < real.tri.punctures:
        raise IncompleteDevelopment(f"no cusp {cusp}")
    t, i = real.tri.links[cusp].corners[0]
    node = real.nodes[real.copy_of(t)]
    holonomy, _ = _walk_link(real, node, i)
    return holonomy


def holonomy_traces(real: DecoratedRealization) -> List[float]:
    return [abs(cusp_holonomy(real, c).trace) for c in range(real.tri.punctures)]


def _edge_copy(real: DecoratedRealization, edge: str) -> Tuple[int, int]:
    if edge not in real.tri.slots:
        raise MissingWeight(f"unknown edge {edge!r}")
    t, i = real.tri.slots[edge][0]
    return real.copy_of(t), i


def horocycle_distance(first: Horocycle, second: Horocycle) -> float:
    """Signed distance between two horocycles along the geodesic joining their bases.

    Negative when the horodiscs overlap.

    Raises:
        CoincidentPoints: both horocycles share a base point.
    """
    if first.at_infinity and second.at_infinity:
        raise CoincidentPoints("both horocycles are based at infinity")
    if first.at_infinity or second.at_infinity:
        top, low = (first, second) if first.at_infinity else (second, first)
        return math.log(top.size / low.size)
    if first.base == second.base:
        raise CoincidentPoints(f"both horocycles are based at {first.base!r}")
    return 2.0 * math.log(abs(first.base - second.base) / math.sqrt(first.size * second.size))


def _gauss_legendre(f, lo: float, hi: float, panels: int, order: int) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    xs = mid[:, None] + half[:, None] * nodes[None, :]
    return float(np.sum(half[:, None] * weights[None, :] * f(xs)))


def horocycle_distance_quadrature(
    first: Horocycle, second: Horocycle, panels: int = 400, order: int = 10
) -> float:
    """The same signed distance by integrating the hyperbolic metric numerically."""
    if first.at_infinity and second.at_infinity:
        raise CoincidentPoints("both horocycles are based at infinity")
    if first.at_infinity or second.at_infinity:
        top, low = (first, second) if first.at_infinity else (second, first)
        # along the vertical line over low.base: from the top of low (y = d) to y = h
        return _gauss_legendre(lambda y: 1.0 / y, low.size, top.size, panels, order)
    if first.base == second.base:
        raise CoincidentPoints(f"both horocycles are based at {first.base!r}")
    left, right = (first, second) if first.base < second.base else (second, first)
    radius = 0.5 * (right.base - left.base)
    # angle on the semicircle measured from the right endpoint; ds = dθ / sin θ
    theta_left = 2.0 * math.atan(2.0 * radius / left.size)
    theta_right = 2.0 * math.atan(right.size / (2.0 * radius))
    return _gauss_legendre(lambda th: 1.0 / np.sin(th), theta_right, theta_left, panels, order)


def measure_lambda(real: DecoratedRealization, edge: str) -> float:
    """λ-length of ``edge`` read from the developed horocycles, e^{δ/2}.

    Raises:
        UndecoratedCusp: shear-only development.
    """
    index, i = _edge_copy(real, edge)
    first, second = real.horocycle(index, i), real.horocycle(index, i + 1)
    return math.exp(horocycle_distance(first, second) / 2.0)


def measure_shear(real: DecoratedRealization, edge: str) -> float:
    """Shear of ``edge`` read from the developed quadrilateral's cross ratio."""
    index, i = _edge_copy(real, edge)
    node = real.nodes[index]
    P, Q, X = node.vertices[i % 3], node.vertices[(i + 1) % 3], node.vertices[(i + 2) % 3]
    neighbour = _cross(real, node, i)
    Z = neighbour.vertices[(neighbour.entry_slot + 2) % 3]
    return math.log(abs(_det(X, P)) * abs(_det(Z, Q)) / (abs(_det(Q, X)) * abs(_det(P, Z))))


def measure_h_length(real: DecoratedRealization, corner: Corner) -> float:
    """Horocyclic arc length cut from the corner sector by the developed horocycle."""
    t, i = corner
    index = real.copy_of(t)
    if not real.decorated:
        raise UndecoratedCusp("h-lengths need a development from lambda-lengths")
    node = real.nodes[index]
    V, A, B = node.vertices[(i + 1) % 3], node.vertices[i % 3], node.vertices[(i + 2) % 3]
    norm = float(np.linalg.norm(V))
    rotate = np.array([[V[0], V[1]], [-V[1], V[0]]]) / norm
    a, b = rotate @ A, rotate @ B
    return abs(a[0] / a[1] - b[0] / b[1]) / (norm * norm)


def canonical_vector(real: DecoratedRealization, index: int, k: int, tol: float = 1e-7) -> np.ndarray:
    """Vector of the length-one horocycle at vertex ``k`` of copy ``index``.

    Raises:
        GeometryError: the cusp holonomy is not parabolic.
    """
    node = real.nodes[index]
    holonomy, _ = _walk_link(real, node, (k - 1) % 3)
    trace = holonomy.trace
    if abs(abs(trace) - 2.0) > tol:
        raise GeometryError(f"cusp holonomy has |trace| {abs(trace)!r}; the cusp is not complete")
    h = holonomy.matrix if trace > 0 else -holonomy.matrix
    v = np.asarray(node.vertices[k % 3], dtype=float)
    vv = float(v @ v)
    u = np.array([-v[1], v[0]]) / vv
    w = (h - np.eye(2)) @ u
    c = float(w @ v) / vv
    if c == 0.0:
        raise GeometryError("cusp holonomy is trivial")
    return math.sqrt(abs(c)) * v


def reduced_length_between(real: DecoratedRealization, first: Tuple[int, int], second: Tuple[int, int]) -> float:
    """Signed distance between the length-one horocycles at two developed vertices."""
    v1 = canonical_vector(real, *first)
    v2 = canonical_vector(real, *second)
    lam = abs(_det(v1, v2))
    if lam < 1e-300:
        raise CoincidentPoints("the two developed vertices coincide")
    return 2.0 * math.log(lam)


def reduced_length(real: DecoratedRealization, edge: str) -> float:
    """Reduced length of ``edge``: δ between its canonical length-one horocycles."""
    index, i = _edge_copy(real, edge)
    return reduced_length_between(real, (index, i), (index, i + 1))


def find_vertex(real: DecoratedRealization, point: float, tol: float = 1e-9) -> Tuple[int, int]:
    """(copy index, vertex) of a developed vertex at ``point``.

    Raises:
        IncompleteDevelopment: no developed vertex lies there.
    """
    for index, node in enumerate(real.nodes):
        for k in range(3):
            if _point_gap(node.point(k), point) <= tol:
                return index, k
    raise IncompleteDevelopment(f"no developed vertex at {point!r}")
