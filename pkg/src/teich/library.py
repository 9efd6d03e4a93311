"""Named triangulations used by the acceptance battery and the tests."""

from __future__ import annotations

from typing import Dict, List, Tuple

from teich.errors import TriangulationError
from teich.surface import IdealTriangulation, validate

# (genus, punctures) in the comments
TRIANGULATIONS: Dict[str, List[List[str]]] = {
    # (1, 1): square with one diagonal
    "torus": [["alpha", "beta", "gamma"], ["alpha", "beta", "gamma"]],
    # (0, 3): two ideal triangles glued along all three sides
    "pillow": [["alpha", "beta", "gamma"], ["alpha", "gamma", "beta"]],
    # (0, 4): boundary of a tetrahedron, edge eij joins vertices i and j
    "tetrahedron": [
        ["e12", "e23", "e13"],
        ["e13", "e34", "e14"],
        ["e14", "e24", "e12"],
        ["e24", "e34", "e23"],
    ],
    # (1, 2)
    "torus2": [
        ["alpha", "x1", "x0"],
        ["beta", "x2", "x1"],
        ["gamma", "x0", "x2"],
        ["alpha", "beta", "gamma"],
    ],
    # (2, 1)
    "genus2": [
        ["a", "b", "d2"],
        ["d2", "a", "d3"],
        ["d3", "b", "d4"],
        ["d4", "c", "d5"],
        ["d5", "d", "d6"],
        ["d6", "c", "d"],
    ],
}

SUITE: Tuple[str, ...] = tuple(TRIANGULATIONS)


def get(name: str) -> IdealTriangulation:
    """Validated triangulation by name.

    Raises:
        TriangulationError: unknown name.
    """
    if name not in TRIANGULATIONS:
        raise TriangulationError(f"unknown triangulation {name!r}; known: {', '.join(SUITE)}")
    return validate(TRIANGULATIONS[name])


def suite() -> List[Tuple[str, IdealTriangulation]]:
    return [(name, get(name)) for name in SUITE]
