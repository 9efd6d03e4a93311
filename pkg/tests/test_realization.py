"""Tests for developing triangulations into the upper half-plane."""

import math
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
for p in (SRC, ROOT):
    if str(p) not in sys.path:
        sys.path.insert(0, str(p))

import pytest

from teich import library
from teich.coords import h_lengths, lambda_assignment
from teich.errors import (
    CoincidentPoints,
    GeometryError,
    IncompleteDevelopment,
    MissingWeight,
    NonpositiveParam,
    UndecoratedCusp,
)
from teich.hyperbolic import INF
from teich.realization import (
    Horocycle,
    cusp_holonomy,
    develop,
    edge_mismatch,
    find_vertex,
    holonomy_traces,
    horocycle_distance,
    horocycle_distance_quadrature,
    measure_h_length,
    measure_lambda,
    measure_shear,
    reduced_length,
)
from teich.surface import balanced_basis


def _balanced_shears(tri, rng):
    shears = {e: 0.0 for e in tri.edges}
    for vec in balanced_basis(tri):
        coeff = rng.uniform(-1.5, 1.5)
        for e in tri.edges:
            shears[e] += coeff * float(vec[e])
    return shears


def _lambdas(tri, rng):
    return lambda_assignment(tri, {e: math.exp(rng.uniform(-1.0, 1.0)) for e in tri.edges})


def test_base_triangle_sits_at_minus_one_zero_infinity():
    tri = library.get("torus")
    real = develop(tri, shears={e: 0.0 for e in tri.edges}, depth=0)
    assert len(real.nodes) == 1
    assert real.nodes[0].points() == (-1.0, 0.0, INF)
    assert find_vertex(real, 0.0) == (0, 1)
    assert find_vertex(real, INF) == (0, 2)
    with pytest.raises(IncompleteDevelopment):
        find_vertex(real, 0.5)
    with pytest.raises(IncompleteDevelopment):
        real.copy_of(1)


@pytest.mark.parametrize("name", ["torus", "tetrahedron"])
def test_balanced_shears_give_complete_cusps(name):
    tri = library.get(name)
    rng = random.Random(21)
    for _ in range(5):
        shears = _balanced_shears(tri, rng)
        real = develop(tri, shears=shears, depth=len(tri.triangles))
        assert all(abs(t - 2.0) <= 1e-8 for t in holonomy_traces(real))
        for edge in tri.edges:
            assert measure_shear(real, edge) == pytest.approx(shears[edge], abs=1e-10)
        assert edge_mismatch(real) <= 1e-9


def test_unbalanced_shears_give_hyperbolic_holonomy():
    tri = library.get("torus")
    real = develop(tri, shears={"alpha": 1.0, "beta": 0.0, "gamma": 0.0}, depth=2)
    assert abs(cusp_holonomy(real, 0).trace) > 2.0 + 1e-3
    with pytest.raises(GeometryError):
        reduced_length(real, "alpha")
    with pytest.raises(IncompleteDevelopment):
        cusp_holonomy(real, 1)


@pytest.mark.parametrize("name", ["torus", "tetrahedron", "torus2"])
def test_lambda_lengths_round_trip(name):
    tri = library.get(name)
    rng = random.Random(22)
    lam = _lambdas(tri, rng)
    real = develop(tri, lam=lam, depth=len(tri.triangles))
    assert real.decorated
    for edge in tri.edges:
        assert measure_lambda(real, edge) == pytest.approx(lam.values[edge], rel=1e-9)


def test_measured_h_lengths():
    tri = library.get("tetrahedron")
    lam = _lambdas(tri, random.Random(23))
    real = develop(tri, lam=lam, depth=2)
    expected = h_lengths(tri, lam)
    for t in range(len(tri.triangles)):
        for i in range(3):
            assert measure_h_length(real, (t, i)) == pytest.approx(expected[(t, i)], rel=1e-9)


def test_horocycle_distances():
    low, top = Horocycle(0.0, 1.0), Horocycle(INF, 2.0)
    assert horocycle_distance(low, top) == pytest.approx(math.log(2.0))
    assert horocycle_distance(top, low) == pytest.approx(math.log(2.0))
    left, right = Horocycle(0.0, 1.0), Horocycle(3.0, 1.0)
    assert horocycle_distance(left, right) == pytest.approx(2.0 * math.log(3.0))
    # overlapping horodiscs
    assert horocycle_distance(Horocycle(0.0, 4.0), Horocycle(1.0, 4.0)) < 0.0


def test_horocycle_distance_quadrature_agrees():
    pairs = [
        (Horocycle(0.0, 1.0), Horocycle(INF, 2.0)),
        (Horocycle(0.0, 1.0), Horocycle(3.0, 1.0)),
        (Horocycle(-1.0, 0.5), Horocycle(2.0, 0.25)),
    ]
    for first, second in pairs:
        assert horocycle_distance_quadrature(first, second) == pytest.approx(horocycle_distance(first, second), abs=1e-8)


def test_horocycle_errors():
    with pytest.raises(NonpositiveParam):
        Horocycle(0.0, 0.0)
    with pytest.raises(CoincidentPoints):
        horocycle_distance(Horocycle(1.0, 1.0), Horocycle(1.0, 2.0))
    with pytest.raises(CoincidentPoints):
        horocycle_distance(Horocycle(INF, 1.0), Horocycle(INF, 2.0))


@pytest.mark.parametrize("name, width", [("pillow", 2.0), ("torus", 6.0)])
def test_reduced_length_with_zero_shears(name, width):
    tri = library.get(name)
    real = develop(tri, shears={e: 0.0 for e in tri.edges}, depth=2)
    for edge in tri.edges:
        assert reduced_length(real, edge) == pytest.approx(2.0 * math.log(width), abs=1e-9)


def test_develop_errors():
    tri = library.get("torus")
    shears = {e: 0.0 for e in tri.edges}
    lam = lambda_assignment(tri, {e: 1.0 for e in tri.edges})
    with pytest.raises(MissingWeight):
        develop(tri)
    with pytest.raises(MissingWeight):
        develop(tri, shears=shears, lam=lam)
    with pytest.raises(MissingWeight):
        develop(tri, shears={"alpha": 0.0})
    with pytest.raises(NonpositiveParam):
        develop(tri, shears=shears, depth=-1)


def test_shear_only_development_has_no_horocycles():
    tri = library.get("torus")
    real = develop(tri, shears={e: 0.0 for e in tri.edges}, depth=1)
    assert not real.decorated
    with pytest.raises(UndecoratedCusp):
        measure_lambda(real, "alpha")
    with pytest.raises(UndecoratedCusp):
        measure_h_length(real, (0, 0))
    with pytest.raises(MissingWeight):
        measure_shear(real, "delta")
