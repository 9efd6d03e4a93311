"""Tests for triangulation validation, cusps, exchange matrix and flips."""

import random
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

from teich import library
from teich.errors import EdgeDegree, EmptyInput, MissingWeight, NonsurfaceGluing, SelfFolded, TriangulationError
from teich.surface import (
    balance_matrix,
    balanced_basis,
    cusp_links,
    cusp_sums,
    epsilon_matrix,
    flip,
    flip_quadrilateral,
    flip_variants,
    is_balanced,
    legal_flips,
    validate,
)


@pytest.mark.parametrize(
    "name, signature",
    [("torus", (1, 1)), ("pillow", (0, 3)), ("tetrahedron", (0, 4)), ("torus2", (1, 2)), ("genus2", (2, 1))],
)
def test_library_signatures(name, signature):
    tri = library.get(name)
    assert tri.signature == signature
    g, n = signature
    assert len(tri.edges) == 6 * g - 6 + 3 * n
    assert len(tri.triangles) == 4 * g - 4 + 2 * n


def test_unknown_library_name():
    with pytest.raises(TriangulationError):
        library.get("klein-bottle")


def test_cusp_links_cover_every_corner_once():
    for _, tri in library.suite():
        corners = [c for link in tri.links for c in link.corners]
        assert len(corners) == 3 * len(tri.triangles)
        assert len(set(corners)) == len(corners)
        ends = [end.edge for link in tri.links for end in link.ends]
        for edge in tri.edges:
            assert ends.count(edge) == 2


def test_cusp_links_close_up():
    # consecutive corners share the side between them, the last and first included
    for _, tri in library.suite():
        for link in tri.links:
            size = len(link.corners)
            for k, (t, i) in enumerate(link.corners):
                nt, ni = link.corners[(k + 1) % size]
                assert tri.triangles[nt][(ni + 1) % 3] == tri.triangles[t][i]


def test_torus_has_one_cusp_of_valence_six():
    tri = library.get("torus")
    assert len(tri.links) == 1
    assert len(tri.links[0]) == 6
    assert cusp_links(tri)[0].edge_sequence == ("alpha", "gamma", "beta", "alpha", "gamma", "beta")
    assert [len(link) for link in cusp_links(library.get("pillow"))] == [2, 2, 2]


@pytest.mark.parametrize(
    "triangles, error",
    [
        ([], EmptyInput),
        ([["a", "b", "c"]], EdgeDegree),
        ([["a", "b"], ["a", "b", "c"]], NonsurfaceGluing),
        ([["a", "a", "b"], ["b", "c", "c"]], SelfFolded),
        ([["a", "b", "c"], ["a", "b", "c"], ["d", "e", "f"], ["d", "e", "f"]], NonsurfaceGluing),
    ],
)
def test_invalid_gluings(triangles, error):
    with pytest.raises(error):
        validate(triangles)


def test_torus_epsilon():
    tri = library.get("torus")
    assert tri.edges == ("alpha", "beta", "gamma")
    expected = np.array([[0, -2, 2], [2, 0, -2], [-2, 2, 0]])
    assert np.array_equal(epsilon_matrix(tri), expected)


def test_pillow_epsilon_vanishes():
    assert not epsilon_matrix(library.get("pillow")).any()


def test_epsilon_is_antisymmetric_with_small_entries():
    for _, tri in library.suite():
        eps = epsilon_matrix(tri)
        assert np.array_equal(eps, -eps.T)
        assert np.abs(eps).max() <= 2


def test_balance_matrix_counts_two_ends_per_edge():
    for _, tri in library.suite():
        assert list(balance_matrix(tri).sum(axis=0)) == [2] * len(tri.edges)


@pytest.mark.parametrize("name", library.SUITE)
def test_balanced_basis_dimension(name):
    tri = library.get(name)
    basis = balanced_basis(tri)
    assert len(basis) == 6 * tri.genus - 6 + 2 * tri.punctures
    for vec in basis:
        assert is_balanced(tri, vec)


def test_cusp_sums_exact_and_float():
    tri = library.get("torus")
    assert cusp_sums(tri, {"alpha": 1, "beta": -1, "gamma": 0}) == [0]
    assert is_balanced(tri, {"alpha": Fraction(1, 3), "beta": Fraction(-1, 3), "gamma": 0})
    assert is_balanced(tri, {"alpha": 0.1, "beta": 0.2, "gamma": -0.3})
    assert not is_balanced(tri, {"alpha": 1, "beta": 0, "gamma": 0})


def test_cusp_sums_missing_weight():
    with pytest.raises(MissingWeight):
        cusp_sums(library.get("torus"), {"alpha": 1})


def test_torus_double_flip_returns_original():
    tri = library.get("torus")
    once = flip(tri, "alpha")
    assert once.signature == (1, 1)
    assert once.canonical() != tri.canonical()
    assert flip(once, "alpha").canonical() == tri.canonical()


def test_flip_quadrilateral_of_torus():
    assert flip_quadrilateral(library.get("torus"), "alpha") == ("beta", "gamma", "beta", "gamma")


def test_pillow_has_no_legal_flip():
    tri = library.get("pillow")
    assert legal_flips(tri) == []
    with pytest.raises(SelfFolded):
        flip(tri, "alpha")


def test_flip_unknown_edge():
    with pytest.raises(MissingWeight):
        flip(library.get("torus"), "delta")


def test_flip_variants_preserve_signature():
    tri = library.get("tetrahedron")
    variants = flip_variants(tri, 10, random.Random(7))
    assert len(variants) == 10
    assert all(v.signature == (0, 4) for v in variants)


def test_flip_variants_of_pillow_are_copies():
    tri = library.get("pillow")
    assert all(v.triangles == tri.triangles for v in flip_variants(tri, 3))
