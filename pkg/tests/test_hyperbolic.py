"""Tests for Möbius maps, line relations, the R kernel, circuit sums and the cusp series."""

import cmath
import math
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
for p in (SRC, ROOT):
    if str(p) not in sys.path:
        sys.path.insert(0, str(p))

import numpy as np
import pytest

from teich.errors import (
    CoincidentPoints,
    GeometryError,
    NonpositiveParam,
    NotInUpperHalfPlane,
    OutOfRange,
    SingularArgument,
)
from teich.hyperbolic import (
    INF,
    GeodesicLine,
    MoebiusMap,
    R,
    R_series,
    S,
    a1_asymptotic,
    circuit_sum_asymptotic,
    circuit_sum_brute,
    cross_ratio,
    gardiner_cusp_limit,
    gardiner_cusp_partial_sum,
    gardiner_tail_estimate,
    lambda_fn,
    length_differential,
    line_angle_cosine,
    line_relation,
    signed_cosine,
    to_imaginary_axis,
    two_sided_asymptotic,
    two_sided_brute,
)
from teich.services.numerics import CompensatedSum, compensated_sum, log_gamma, two_sum


def test_moebius_normalizes_and_composes():
    g = MoebiusMap.from_entries(2.0, 1.0, 1.0, 1.0)
    assert np.linalg.det(g.matrix) == pytest.approx(1.0)
    h = g @ g.inverse()
    assert np.allclose(h.matrix, np.eye(2))
    assert g(INF) == pytest.approx(2.0)
    assert g(-1.0) == INF
    assert g(1j) == pytest.approx((2j + 1) / (1j + 1))


def test_moebius_rejects_negative_determinant():
    with pytest.raises(GeometryError):
        MoebiusMap.from_entries(0.0, 1.0, 1.0, 0.0)


def test_moebius_kinds_and_axis():
    hyperbolic = MoebiusMap.from_entries(13.0, 8.0, 8.0, 5.0)
    assert hyperbolic.kind() == "hyperbolic"
    assert hyperbolic.translation_length() == pytest.approx(2.0 * math.acosh(9.0))
    repelling, attracting = hyperbolic.fixed_points()
    assert hyperbolic(attracting) == pytest.approx(attracting)
    assert hyperbolic(repelling) == pytest.approx(repelling)
    # points near the repelling end move towards the attracting one
    x = repelling + 1e-3
    assert abs(hyperbolic(x) - attracting) < abs(x - attracting)
    assert MoebiusMap.from_entries(1.0, 1.0, 0.0, 1.0).kind() == "parabolic"
    assert MoebiusMap.from_entries(0.0, -1.0, 1.0, 0.0).kind() == "elliptic"
    with pytest.raises(OutOfRange):
        MoebiusMap.from_entries(0.0, -1.0, 1.0, 0.0).fixed_points()
    with pytest.raises(OutOfRange):
        MoebiusMap.identity().translation_length()


def test_diagonal_map_fixed_points():
    g = MoebiusMap.from_entries(2.0, 0.0, 0.0, 0.5)
    assert g.fixed_points() == (0.0, INF)
    assert g.axis() == GeodesicLine(0.0, INF)


def test_geodesic_from_triple():
    assert GeodesicLine.from_triple(1, 0, -1) == GeodesicLine(-1.0, 1.0)
    assert GeodesicLine.from_triple(0, 1, 0) == GeodesicLine(0.0, INF)
    assert GeodesicLine.from_triple(0, -1, 2) == GeodesicLine(INF, 2.0)
    with pytest.raises(GeometryError):
        GeodesicLine.from_triple(1, 0, 1)
    with pytest.raises(CoincidentPoints):
        GeodesicLine(1.0, 1.0)


def test_cross_ratio():
    assert cross_ratio(0.0, 1.0, INF, -1.0) == pytest.approx(2.0)
    assert cross_ratio(1.0, 2.0, 3.0, 4.0) == pytest.approx((1 - 3) * (2 - 4) / ((1 - 4) * (2 - 3)))
    with pytest.raises(CoincidentPoints):
        cross_ratio(1.0, 1.0, 2.0, 3.0)


def test_cross_ratio_is_moebius_invariant():
    g = MoebiusMap.from_entries(3.0, 1.0, 2.0, 1.0)
    points = (-2.0, 0.5, 1.5, 7.0)
    assert cross_ratio(*(g(x) for x in points)) == pytest.approx(cross_ratio(*points))


def test_to_imaginary_axis():
    line = GeodesicLine(2.0, -3.0)
    g = to_imaginary_axis(line)
    assert g(2.0) == pytest.approx(0.0, abs=1e-12)
    assert g(-3.0) == INF or abs(g(-3.0)) > 1e12
    assert np.linalg.det(g.matrix) == pytest.approx(1.0)


def test_line_relations():
    axis = GeodesicLine(0.0, INF)
    far = line_relation(axis, GeodesicLine(1.0, 2.0))
    assert far.kind == "ultraparallel"
    assert far.value == pytest.approx(3.0)
    cross = line_relation(axis, GeodesicLine(-1.0, 1.0))
    assert cross.kind == "intersecting"
    assert cross.value == pytest.approx(0.0)
    assert line_relation(axis, GeodesicLine(0.0, 5.0)).kind == "asymptotic"
    assert line_relation(axis, GeodesicLine(INF, 0.0)).kind == "equal"


def test_line_relation_invariance():
    g = MoebiusMap.from_entries(2.0, 1.0, 3.0, 2.0)
    first, second = GeodesicLine(-1.0, 3.0), GeodesicLine(0.5, 2.0)
    before = line_relation(first, second)
    after = line_relation(first.image(g), second.image(g))
    assert after.kind == before.kind
    assert after.value == pytest.approx(before.value)


def test_angle_cosines():
    axis = GeodesicLine(0.0, INF)
    other = GeodesicLine(-1.0, 2.0)
    assert line_angle_cosine(axis, other) == pytest.approx(-1.0 / 3.0)
    assert line_angle_cosine(axis, other.reversed()) == pytest.approx(-1.0 / 3.0)
    assert line_angle_cosine(axis.reversed(), other) == pytest.approx(-1.0 / 3.0)
    assert signed_cosine(axis, other) == pytest.approx(1.0 / 3.0)
    assert signed_cosine(axis, other.reversed()) == pytest.approx(-1.0 / 3.0)
    with pytest.raises(GeometryError):
        line_angle_cosine(axis, GeodesicLine(1.0, 2.0))


def test_R_values():
    assert R(3.0) == pytest.approx(3.0 * math.log(2.0) - 2.0, abs=1e-14)
    assert R(0.5) == pytest.approx(0.5 * math.log(3.0) - 2.0, abs=1e-14)
    assert R(0.0) == -2.0
    assert R(-3.0) == R(3.0)
    with pytest.raises(SingularArgument):
        R(1.0)


def test_R_series_matches_closed_form():
    for u in (2.0, 2.5, 4.0, 10.0):
        closed = u * math.log((u + 1.0) / (u - 1.0)) - 2.0
        assert R_series(u) == pytest.approx(closed, rel=1e-10)
    with pytest.raises(OutOfRange):
        R_series(0.5)


def test_R_decays_like_two_thirds_over_u_squared():
    u = 1e4
    assert R(u) * u * u == pytest.approx(2.0 / 3.0, rel=1e-6)


def test_S_is_R_of_cosh():
    for t in (0.1, 0.7, 1.5, 3.0):
        assert S(t) == pytest.approx(R(math.cosh(t)), rel=1e-12)
    with pytest.raises(SingularArgument):
        S(0.0)
    with pytest.raises(OutOfRange):
        S(-1.0)


def test_lambda_fn():
    assert lambda_fn(0.0) == pytest.approx(1.0 / (2.0 * math.pi))
    assert lambda_fn(1.0) == lambda_fn(0.0)
    assert lambda_fn(0.5) == pytest.approx(0.125, abs=1e-12)
    assert lambda_fn(0.25) == pytest.approx(3.0 * math.sqrt(2.0) / 32.0, abs=1e-12)
    assert lambda_fn(1e-9) == pytest.approx(lambda_fn(0.0), rel=1e-6)
    assert lambda_fn(0.3) == pytest.approx(lambda_fn(0.7))
    with pytest.raises(OutOfRange):
        lambda_fn(1.5)


def test_log_gamma():
    for x in (0.25, 0.5, 1.0, 3.7, 12.0):
        assert log_gamma(x) == pytest.approx(math.lgamma(x), abs=1e-13)
    with pytest.raises(ValueError):
        log_gamma(0.0)


def test_compensated_sum_keeps_small_terms():
    values = [1e16, 1.0, -1e16] * 100
    assert compensated_sum(values) == 100.0
    acc = CompensatedSum().add(0.1).add(0.2)
    assert float(acc) == pytest.approx(0.3)
    assert acc.count == 2


def test_two_sum_is_error_free():
    s, t = two_sum(1e16, 1.0)
    assert (s, t) == (1e16, 1.0)
    s, t = two_sum(0.1, 0.2)
    assert s == 0.1 + 0.2
    assert Fraction(s) + Fraction(t) == Fraction(0.1) + Fraction(0.2)


def test_circuit_sum_brute_tail_and_errors():
    result = circuit_sum_brute(0.5, 0.1, tail_tol=1e-14)
    assert result.tail_bound < 1e-14
    assert result.terms > 0
    with pytest.raises(NonpositiveParam):
        circuit_sum_brute(0.0, 0.1)
    with pytest.raises(NonpositiveParam):
        circuit_sum_brute(0.5, -1.0)


@pytest.mark.parametrize("a", [0.25, 0.5, 1.0])
def test_circuit_sum_expansion_error_shrinks_linearly(a):
    ells = (0.1, 0.05, 0.02, 0.01)
    errors = [abs(circuit_sum_brute(a, ell).value - circuit_sum_asymptotic(a, ell)) for ell in ells]
    assert all(e2 < e1 for e1, e2 in zip(errors, errors[1:]))
    slope = np.polyfit(np.log(ells), np.log(errors), 1)[0]
    assert slope >= 0.9


def test_a_equal_one_expansion():
    for ell in (0.5, 0.05):
        assert circuit_sum_asymptotic(1.0, ell) == pytest.approx(a1_asymptotic(ell), rel=1e-13)
        assert circuit_sum_asymptotic(1.0, ell, "shifted") == pytest.approx(a1_asymptotic(ell), rel=1e-13)


def test_shifted_convention_offset():
    a, ell = 0.3, 0.1
    gap = circuit_sum_asymptotic(a, ell, "shifted") - circuit_sum_asymptotic(a, ell)
    assert gap == pytest.approx(2.0 * math.log(a))
    with pytest.raises(OutOfRange):
        circuit_sum_asymptotic(a, ell, "other")


def test_two_sided_sum():
    a, ell = 0.3, 0.01
    brute = two_sided_brute(a, ell)
    assert brute.value == pytest.approx(two_sided_asymptotic(a, ell), abs=0.05)
    assert two_sided_asymptotic(a, ell, "shifted") - two_sided_asymptotic(a, ell) == pytest.approx(
        2.0 * math.log(lambda_fn(a)) + 2.0 * math.log(2.0 * math.sin(math.pi * a))
    )
    with pytest.raises(OutOfRange):
        two_sided_brute(1.0, ell)


def test_gardiner_partial_sum_converges():
    z = complex(0.37, 0.59)
    limit = gardiner_cusp_limit(z)
    assert abs(gardiner_cusp_partial_sum(z, 100_000) - limit) <= 1e-4
    assert abs(gardiner_cusp_partial_sum(z, 1_000) - limit) > abs(gardiner_cusp_partial_sum(z, 10_000) - limit)
    assert gardiner_tail_estimate(z, 1000) == pytest.approx(2e-3)
    assert length_differential(z) == pytest.approx(2.0 / math.pi * limit)
    assert limit == pytest.approx((math.pi / cmath.sin(math.pi * z)) ** 2)


def test_gardiner_rejects_lower_half_plane():
    with pytest.raises(NotInUpperHalfPlane):
        gardiner_cusp_limit(complex(0.2, -0.1))
    with pytest.raises(NonpositiveParam):
        gardiner_cusp_partial_sum(1j, 0)
