"""The Weil–Petersson form, combinatorially.

Two weight systems on edges are paired cusp by cusp: around each cusp the
weights of the side-ends, read in counterclockwise order, give two cyclic
sequences, and the elementary 2-form ω of those sequences is summed over
cusps. Everything here runs over exact rationals; floats are accepted but
only checked up to a tolerance.

The module also builds the WP form in the ``d log λ`` basis four different
ways (λ-lengths per triangle, h-lengths per triangle, h-lengths per cusp,
and ``d log λ ∧ dσ``), each as an integer ``FormMatrix``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import sympy as sp

from teich.coords import LambdaAssignment, shear_coords, shear_functional
from teich.errors import LengthMismatch, MissingWeight, TeichError, Unbalanced
from teich.surface import IdealTriangulation, Number, WeightSystem, epsilon_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CuspSequencePair:
    """Co-indexed cyclic weight sequences around one cusp."""

    first: Tuple[Number, ...]
    second: Tuple[Number, ...]

    def partial_sums(self, which: str = "first") -> List[Number]:
        seq = self.first if which == "first" else self.second
        sums: List[Number] = [0]
        for value in seq:
            sums.append(sums[-1] + value)
        return sums

    def rotated(self, shift: int) -> "CuspSequencePair":
        k = shift % len(self.first) if self.first else 0
        return CuspSequencePair(self.first[k:] + self.first[:k], self.second[k:] + self.second[:k])


@dataclass
class FormMatrix:
    """A 2-form in the ``d log λ_e`` basis as an antisymmetric integer matrix."""

    edges: Tuple[str, ...]
    matrix: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FormMatrix):
            return NotImplemented
        return self.edges == other.edges and np.array_equal(self.matrix, other.matrix)

    def entry(self, a: str, b: str) -> int:
        return int(self.matrix[self.edges.index(a), self.edges.index(b)])

    def is_antisymmetric(self) -> bool:
        return bool(np.array_equal(self.matrix, -self.matrix.T))

    def rank(self) -> int:
        return int(sp.Matrix(self.matrix.tolist()).rank())

    def kernel_dimension(self) -> int:
        return len(self.edges) - self.rank()

    def as_lists(self) -> List[List[int]]:
        return [[int(v) for v in row] for row in self.matrix]


def _is_zero(value: Number, tol: float) -> bool:
    if isinstance(value, float):
        return abs(value) <= tol
    return value == 0


def omega_cusp(pair: CuspSequencePair, tol: float = 1e-9) -> Number:
    """½ Σ (A_j + A_{j-1}) b_j with A the partial sums of the first sequence.

    Raises:
        LengthMismatch: sequences of different length.
        Unbalanced: either sequence does not sum to zero.
    """
    if len(pair.first) != len(pair.second):
        raise LengthMismatch(
            f"cusp sequences have lengths {len(pair.first)} and {len(pair.second)}"
        )
    sums = pair.partial_sums("first")
    if not _is_zero(sums[-1], tol):
        raise Unbalanced(f"first sequence sums to {sums[-1]}, not zero")
    if not _is_zero(sum(pair.second, 0), tol):
        raise Unbalanced(f"second sequence sums to {sum(pair.second, 0)}, not zero")
    total: Number = 0
    for j, b in enumerate(pair.second, start=1):
        total += (sums[j] + sums[j - 1]) * b
    return _half(total)


def omega_cusp_alternating(pair: CuspSequencePair, tol: float = 1e-9) -> Number:
    """The same pairing written as ½ Σ (A_j b_j - B_j a_j)."""
    if len(pair.first) != len(pair.second):
        raise LengthMismatch(
            f"cusp sequences have lengths {len(pair.first)} and {len(pair.second)}"
        )
    big_a, big_b = pair.partial_sums("first"), pair.partial_sums("second")
    if not (_is_zero(big_a[-1], tol) and _is_zero(big_b[-1], tol)):
        raise Unbalanced("cusp sequences must both sum to zero")
    total: Number = 0
    for j in range(1, len(pair.first) + 1):
        total += big_a[j] * pair.second[j - 1] - big_b[j] * pair.first[j - 1]
    return _half(total)


def _half(value: Number) -> Number:
    if isinstance(value, float):
        return value / 2
    return Fraction(value) / 2


def cusp_pairs(tri: IdealTriangulation, w_a: WeightSystem, w_b: WeightSystem) -> List[CuspSequencePair]:
    """Induced link sequences per cusp (weight of a side-end is its edge's weight)."""
    for name, weights in (("first", w_a), ("second", w_b)):
        missing = [e for e in tri.edges if e not in weights]
        if missing:
            raise MissingWeight(f"{name} weight system lacks edge(s) {', '.join(missing)}")
    return [
        CuspSequencePair(
            first=tuple(w_a[e] for e in link.edge_sequence),
            second=tuple(w_b[e] for e in link.edge_sequence),
        )
        for link in tri.links
    ]


def omega_total(
    tri: IdealTriangulation,
    w_a: WeightSystem,
    w_b: WeightSystem,
    threads: int = 1,
    tol: float = 1e-9,
) -> Number:
    """Σ over cusps of ω on the induced sequences, summed in cusp order.

    Raises:
        Unbalanced: either weight system fails the balance condition at some cusp.
    """
    pairs = cusp_pairs(tri, w_a, w_b)
    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lambda p: omega_cusp(p, tol), pairs))
    else:
        values = [omega_cusp(p, tol) for p in pairs]
    total: Number = 0
    for value in values:
        total += value
    return total


def poisson_bracket(tri: IdealTriangulation, w_a: WeightSystem, w_b: WeightSystem, threads: int = 1) -> Number:
    """{L(w_a), L(w_b)} = 2 ω(w_a, w_b)."""
    return 2 * omega_total(tri, w_a, w_b, threads=threads)


def wp_shear_pairing(tri: IdealTriangulation, w_a: WeightSystem, w_b: WeightSystem, threads: int = 1) -> Number:
    """ω_WP of the two shear deformations, ½ ω(w_a, w_b)."""
    return _half(omega_total(tri, w_a, w_b, threads=threads))


def shear_weight_system(tri: IdealTriangulation, edge: str) -> Dict[str, int]:
    """W_e: the weights whose length function is twice the shear of ``edge``."""
    return shear_functional(tri, edge)


@dataclass
class FockReport:
    """Exact comparison of ω(W_e, W_f) against 2 ε_ef over all edge pairs."""

    edges: Tuple[str, ...]
    omega: List[List[Fraction]]
    epsilon: List[List[int]]
    passed: bool
    first_failure: Optional[Tuple[str, str]] = None


def fock_check(tri: IdealTriangulation, threads: int = 1) -> FockReport:
    eps = epsilon_matrix(tri)
    weights = {e: shear_weight_system(tri, e) for e in tri.edges}
    omega: List[List[Fraction]] = []
    failure: Optional[Tuple[str, str]] = None
    for i, e in enumerate(tri.edges):
        row = []
        for j, f in enumerate(tri.edges):
            value = Fraction(omega_total(tri, weights[e], weights[f], threads=threads))
            row.append(value)
            if failure is None and value != 2 * int(eps[i, j]):
                failure = (e, f)
        omega.append(row)
    if failure:
        logger.warning("Fock comparison fails first at %s", failure)
    return FockReport(
        edges=tri.edges,
        omega=omega,
        epsilon=[[int(v) for v in row] for row in eps],
        passed=failure is None,
        first_failure=failure,
    )


# --- the four constructions of the WP form --------------------------------------


def _wedge(matrix: np.ndarray, a: Dict[int, int], b: Dict[int, int], scale: int = 1) -> None:
    """Add scale * (α ∧ β) for 1-forms given as sparse coefficient dicts."""
    for i, ca in a.items():
        for j, cb in b.items():
            matrix[i, j] += scale * ca * cb
            matrix[j, i] -= scale * ca * cb


def _h_form(tri: IdealTriangulation, corner: Tuple[int, int]) -> Dict[int, int]:
    """d log h at a corner as coefficients of d log λ."""
    t, i = corner
    sides = tri.triangles[t]
    coeffs: Dict[int, int] = {}
    for label, c in ((sides[(i + 2) % 3], 1), (sides[i], -1), (sides[(i + 1) % 3], -1)):
        k = tri.edge_index(label)
        coeffs[k] = coeffs.get(k, 0) + c
    return coeffs


def _divide_exact(matrix: np.ndarray, divisor: int, what: str) -> np.ndarray:
    if np.any(matrix % divisor):
        raise TeichError(f"{what} form is not divisible by {divisor}")
    return matrix // divisor


def wp_form_lambda(tri: IdealTriangulation) -> FormMatrix:
    """Σ over triangles of the clockwise cyclic sum d log λ_a ∧ d log λ_b."""
    size = len(tri.edges)
    matrix = np.zeros((size, size), dtype=np.int64)
    for sides in tri.triangles:
        cw = [tri.edge_index(sides[k]) for k in (0, 2, 1)]
        for k in range(3):
            _wedge(matrix, {cw[k]: 1}, {cw[(k + 1) % 3]: 1})
    return FormMatrix(tri.edges, matrix)


def wp_form_h_triangles(tri: IdealTriangulation) -> FormMatrix:
    """Σ over triangles of the clockwise cyclic sum d log h ∧ d log h over sectors, quartered."""
    size = len(tri.edges)
    matrix = np.zeros((size, size), dtype=np.int64)
    for t in range(len(tri.triangles)):
        cw = [_h_form(tri, (t, k)) for k in (0, 2, 1)]
        for k in range(3):
            _wedge(matrix, cw[k], cw[(k + 1) % 3])
    return FormMatrix(tri.edges, _divide_exact(matrix, 4, "triangle h-length"))


def wp_form_h_cusps(tri: IdealTriangulation) -> FormMatrix:
    """Σ over cusps of consecutive sector wedges d log h_c ∧ d log h_c', quartered."""
    size = len(tri.edges)
    matrix = np.zeros((size, size), dtype=np.int64)
    for link in tri.links:
        count = len(link.corners)
        for k in range(count):
            _wedge(matrix, _h_form(tri, link.corners[k]), _h_form(tri, link.corners[(k + 1) % count]))
    return FormMatrix(tri.edges, _divide_exact(matrix, 4, "cusp h-length"))


def wp_form_lambda_sigma(tri: IdealTriangulation) -> FormMatrix:
    """½ Σ_e d log λ_e ∧ dσ_e."""
    size = len(tri.edges)
    matrix = np.zeros((size, size), dtype=np.int64)
    for e in tri.edges:
        coeffs = {tri.edge_index(f): c for f, c in shear_functional(tri, e).items() if c}
        _wedge(matrix, {tri.edge_index(e): 1}, coeffs)
    return FormMatrix(tri.edges, _divide_exact(matrix, 2, "lambda-shear"))


WP_FORMS = {
    "lambda": wp_form_lambda,
    "h_triangles": wp_form_h_triangles,
    "h_cusps": wp_form_h_cusps,
    "lambda_sigma": wp_form_lambda_sigma,
}


# --- linearity of balanced lengths in the shears -----------------------------------


@dataclass
class LprReport:
    """Both sides of L(w)(λ) = ω(σ(λ), w) as linear functionals of log λ."""

    lhs: Dict[str, Fraction]
    rhs: Dict[str, Fraction]
    lhs_value: Fraction
    rhs_value: Fraction
    zero_shear_values: List[Fraction] = field(default_factory=list)
    passed: bool = False


def lpr_check(tri: IdealTriangulation, lam: LambdaAssignment, weights: WeightSystem) -> LprReport:
    """Check that a balanced length function is linear in the shear coordinates.

    The identity is verified coefficient by coefficient in the log λ basis,
    evaluated at ``lam``, and on a basis of the λ's with all shears zero.

    Raises:
        Unbalanced: ``weights`` is not balanced.
        TeichError: ``lam`` is not in formal-log mode.
    """
    if not lam.log_mode:
        raise TeichError("lpr_check needs formal-log lambda-lengths")
    missing = [e for e in tri.edges if e not in weights]
    if missing:
        raise MissingWeight(f"no weight for edge(s) {', '.join(missing)}")
    functionals = {e: shear_functional(tri, e) for e in tri.edges}

    def rhs_at(x: Mapping[str, Fraction]) -> Fraction:
        sigma = {e: sum((c * x[f] for f, c in functionals[e].items()), Fraction(0)) for e in tri.edges}
        return Fraction(omega_total(tri, sigma, weights))

    lhs = {e: 2 * Fraction(weights[e]) for e in tri.edges}
    rhs = {}
    for e in tri.edges:
        unit = {f: Fraction(int(f == e)) for f in tri.edges}
        rhs[e] = rhs_at(unit)

    lhs_value = sum((lhs[e] * lam.values[e] for e in tri.edges), Fraction(0))
    shears = shear_coords(tri, lam)
    rhs_value = Fraction(omega_total(tri, shears.values, weights))

    shear_matrix = sp.Matrix([[functionals[e][f] for f in tri.edges] for e in tri.edges])
    zero_values = []
    for vec in shear_matrix.nullspace():
        x = {f: Fraction(int(v.p), int(v.q)) for f, v in zip(tri.edges, vec)}
        zero_values.append(sum((lhs[e] * x[e] for e in tri.edges), Fraction(0)))

    passed = lhs == rhs and lhs_value == rhs_value and all(v == 0 for v in zero_values)
    if not passed:
        logger.warning("lpr identity fails: lhs=%s rhs=%s", lhs, rhs)
    return LprReport(
        lhs=lhs,
        rhs=rhs,
        lhs_value=lhs_value,
        rhs_value=rhs_value,
        zero_shear_values=zero_values,
        passed=passed,
    )

