"""Acceptance battery.

Each check is a function returning a list of ``CheckResult``; the battery
runs them on a thread pool and reports them in declaration order, so the
output does not depend on the number of threads. Randomized checks draw
from ``random.Random(seed)`` with a seed per check.
"""

from __future__ import annotations

import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np

from teich import library
from teich.config.settings import Settings, get_settings
from teich.coords import (
    coupling_residuals,
    cusp_shear_sums,
    formal_log_assignment,
    lambda_assignment,
    ptolemy_flip,
    rescale_decoration,
    balanced_length,
    shear_coords,
)
from teich.hyperbolic import circuit_sum_asymptotic, circuit_sum_brute, gardiner_cusp_limit, gardiner_cusp_partial_sum
from teich.modular import SIGMA_BRACKET_LIMIT, dedekind_relation, shpr_pairing
from teich.realization import develop, holonomy_traces, measure_lambda, measure_shear
from teich.services.io import CheckResult, check
from teich.surface import IdealTriangulation, balanced_basis, flip_variants, legal_flips
from teich.symplectic import WP_FORMS, fock_check, lpr_check, omega_total

logger = logging.getLogger(__name__)

CIRCUIT_A = (0.25, 0.5, 0.75, 1.0)
CIRCUIT_ELL = (0.2, 0.1, 0.05, 0.02, 0.01)
GARDINER_Z = complex(0.37, 0.59)
SIGMA = {"a": 1, "b": 1, "c": 1, "alpha": -1, "beta": -1, "gamma": -1}


@dataclass(frozen=True)
class SuiteOptions:
    seed: int
    trials: int
    tolerance: float
    tail_tol: float
    dedekind_cutoff: float
    full: bool = False
    realization_trials: int = 200
    coordinate_trials: int = 1000

    @classmethod
    def from_settings(cls, settings: Settings, full: bool = False, trials: Optional[int] = None) -> "SuiteOptions":
        """Options from ``settings``; ``trials`` replaces every per-check trial count."""
        return cls(
            seed=settings.seed,
            trials=trials or settings.random_trials,
            tolerance=settings.tolerance,
            tail_tol=settings.tail_tol,
            dedekind_cutoff=settings.dedekind_cutoff,
            full=full,
            realization_trials=trials or settings.realization_trials,
            coordinate_trials=trials or settings.coordinate_trials,
        )


def _rational(rng: random.Random, span: int = 12) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, 7))


def _random_balanced(tri: IdealTriangulation, rng: random.Random) -> Dict[str, Fraction]:
    weights = {e: Fraction(0) for e in tri.edges}
    for vec in balanced_basis(tri):
        coeff = _rational(rng)
        for e in tri.edges:
            weights[e] += coeff * vec[e]
    return weights


def check_form_equality(opts: SuiteOptions) -> List[CheckResult]:
    rng = random.Random(opts.seed)
    results = []
    for name, tri in library.suite():
        variants = [tri] + flip_variants(tri, opts.trials, rng)
        bad = 0
        for variant in variants:
            forms = [build(variant) for build in WP_FORMS.values()]
            if any(f != forms[0] for f in forms[1:]):
                bad += 1
        results.append(check(f"forms-equal[{name}]", bad == 0, detail=f"{len(variants)} triangulations, {bad} mismatched"))
    return results


def check_fock(opts: SuiteOptions) -> List[CheckResult]:
    results = []
    for name, tri in library.suite():
        report = fock_check(tri)
        results.append(check(f"fock-equals-wp[{name}]", report.passed, detail=str(report.first_failure or "")))
    return results


def check_torus_bracket(opts: SuiteOptions) -> List[CheckResult]:
    rng = random.Random(opts.seed + 1)
    tri = library.get("torus")
    bad = 0
    for _ in range(opts.trials):
        a, b, c, d = (_rational(rng) for _ in range(4))
        first = {"alpha": c, "beta": d, "gamma": -c - d}
        second = {"alpha": a, "beta": b, "gamma": -a - b}
        if omega_total(tri, first, second) != a * d - b * c:
            bad += 1
    return [check("torus-omega", bad == 0, detail=f"{opts.trials} trials, {bad} failures")]


def check_lpr(opts: SuiteOptions) -> List[CheckResult]:
    rng = random.Random(opts.seed + 2)
    results = []
    for name, tri in library.suite():
        bad = 0
        for _ in range(opts.trials):
            weights = _random_balanced(tri, rng)
            lam = formal_log_assignment(tri, {e: _rational(rng) for e in tri.edges})
            if not lpr_check(tri, lam, weights).passed:
                bad += 1
        results.append(check(f"lpr[{name}]", bad == 0, detail=f"{opts.trials} trials, {bad} failures"))
    return results


def check_circuit_sums(opts: SuiteOptions) -> List[CheckResult]:
    results = []
    for a in CIRCUIT_A:
        errors, tails = [], []
        for ell in CIRCUIT_ELL:
            brute = circuit_sum_brute(a, ell, tail_tol=opts.tail_tol)
            errors.append(abs(brute.value - circuit_sum_asymptotic(a, ell)))
            tails.append(brute.tail_bound)
        decreasing = all(e2 < e1 for e1, e2 in zip(errors, errors[1:]))
        slope = float(np.polyfit(np.log(CIRCUIT_ELL), np.log(errors), 1)[0])
        ok = decreasing and slope >= 0.9 and max(tails) < opts.tail_tol
        results.append(
            check(f"circuit-sum[a={a}]", ok, lhs=errors, rhs=slope, detail=f"max tail bound {max(tails):.3e}")
        )
    return results


def check_gardiner(opts: SuiteOptions) -> List[CheckResult]:
    partial = gardiner_cusp_partial_sum(GARDINER_Z, 100_000)
    limit = gardiner_cusp_limit(GARDINER_Z)
    error = abs(partial - limit)
    return [check("gardiner-cusp", error <= 1e-4, lhs=partial, rhs=limit, tolerance=1e-4, error=error)]


def check_dimension(opts: SuiteOptions) -> List[CheckResult]:
    results = []
    for name, tri in library.suite():
        expected = 6 * tri.genus - 6 + 2 * tri.punctures
        got = len(balanced_basis(tri))
        results.append(check(f"balanced-dimension[{name}]", got == expected, lhs=got, rhs=expected))
    return results


def check_coordinates(opts: SuiteOptions) -> List[CheckResult]:
    rng = random.Random(opts.seed + 3)
    results = []
    for name, tri in library.suite():
        failures: Dict[str, int] = {"coupling": 0, "cusp-shear": 0, "ptolemy": 0, "decoration": 0}
        flips = legal_flips(tri)
        basis = balanced_basis(tri)
        for _ in range(opts.coordinate_trials):
            lam = lambda_assignment(tri, {e: Fraction(rng.randint(1, 30), rng.randint(1, 30)) for e in tri.edges})
            if any(lhs != rhs for lhs, rhs in coupling_residuals(tri, lam).values()):
                failures["coupling"] += 1
            logs = formal_log_assignment(tri, {e: _rational(rng) for e in tri.edges})
            if any(s != 0 for s in cusp_shear_sums(tri, shear_coords(tri, logs).values)):
                failures["cusp-shear"] += 1
            if flips:
                edge = rng.choice(flips)
                tri2, lam2 = ptolemy_flip(tri, lam, edge)
                tri3, lam3 = ptolemy_flip(tri2, lam2, edge)
                if tri3.canonical() != tri.canonical() or dict(lam3.values) != dict(lam.values):
                    failures["ptolemy"] += 1
            if basis:
                weights = _random_balanced(tri, rng)
                moved = rescale_decoration(tri, logs, rng.randrange(tri.punctures), _rational(rng))
                if balanced_length(tri, logs, weights) != balanced_length(tri, moved, weights):
                    failures["decoration"] += 1
        for label, bad in failures.items():
            results.append(check(f"{label}[{name}]", bad == 0, detail=f"{opts.coordinate_trials} trials, {bad} failures"))
    return results


def check_realization(opts: SuiteOptions) -> List[CheckResult]:
    rng = random.Random(opts.seed + 4)
    results = []
    for name in ("torus", "tetrahedron"):
        tri = library.get(name)
        basis = balanced_basis(tri)
        worst_trace = worst_lambda = worst_shear = 0.0
        for _ in range(opts.realization_trials):
            shears = {e: 0.0 for e in tri.edges}
            for vec in basis:
                coeff = rng.uniform(-1.5, 1.5)
                for e in tri.edges:
                    shears[e] += coeff * float(vec[e])
            real = develop(tri, shears=shears, depth=len(tri.triangles))
            worst_trace = max(worst_trace, max(abs(t - 2.0) for t in holonomy_traces(real)))
            worst_shear = max(worst_shear, max(abs(measure_shear(real, e) - shears[e]) for e in tri.edges))
            lam = lambda_assignment(tri, {e: math.exp(rng.uniform(-1.0, 1.0)) for e in tri.edges})
            decorated = develop(tri, lam=lam, depth=len(tri.triangles))
            worst_lambda = max(
                worst_lambda, max(abs(measure_lambda(decorated, e) / lam.values[e] - 1.0) for e in tri.edges)
            )
        results.append(check(f"complete-holonomy[{name}]", worst_trace <= 1e-9, error=worst_trace, tolerance=1e-9))
        results.append(check(f"measured-shear[{name}]", worst_shear <= 1e-10, error=worst_shear, tolerance=1e-10))
        results.append(check(f"lambda-round-trip[{name}]", worst_lambda <= 1e-9, error=worst_lambda, tolerance=1e-9))
    return results


def check_gamma2_pairing(opts: SuiteOptions) -> List[CheckResult]:
    log2, log3, logpi = math.log(2.0), math.log(3.0), math.log(math.pi)
    cutoff = opts.dedekind_cutoff if opts.full else 100.0
    ledger = shpr_pairing(SIGMA, SIGMA, cutoff)
    expected = {
        "reduced": (ledger.reduced_total, 18 * log2 + 12),
        "cusp": (ledger.cusp_total, 60 * log2 - 12 * logpi - 24 * log3),
        "intersection": (ledger.intersection_total, 6 * log3 - 12),
    }
    results = [
        check(f"sigma-pairing-{label}", abs(got - want) <= 1e-12, lhs=got, rhs=want, tolerance=1e-12)
        for label, (got, want) in expected.items()
    ]
    if opts.full:
        results.append(
            check(
                "sigma-self-pairing",
                abs(ledger.bracket - SIGMA_BRACKET_LIMIT) <= 3e-2,
                lhs=ledger.bracket,
                rhs=SIGMA_BRACKET_LIMIT,
                tolerance=3e-2,
            )
        )
    return results


def check_dedekind(opts: SuiteOptions) -> List[CheckResult]:
    report = dedekind_relation(opts.dedekind_cutoff)
    step = abs(report.delta - report.table[-2].delta)
    return [
        check("dedekind-cauchy", step <= 1e-3, lhs=report.delta, rhs=report.table[-2].delta, tolerance=1e-3, error=step),
        check(
            "dedekind-limit",
            report.limit_error <= 1e-3,
            lhs=report.extrapolated,
            rhs=report.limit,
            tolerance=1e-3,
            error=report.limit_error,
            detail=f"closed form {report.target:.6f} missed by {report.error:.4f}",
        ),
    ]


CHECKS: List[Callable[[SuiteOptions], List[CheckResult]]] = [
    check_form_equality,
    check_fock,
    check_torus_bracket,
    check_lpr,
    check_circuit_sums,
    check_dedekind,
    check_gamma2_pairing,
    check_realization,
    check_coordinates,
    check_dimension,
    check_gardiner,
]
# minutes rather than seconds; only with --full
SLOW_CHECKS = {check_dedekind}


def run_suite(opts: Optional[SuiteOptions] = None, threads: int = 1) -> List[CheckResult]:
    """Run the battery; results keep the order of ``CHECKS``."""
    opts = opts or SuiteOptions.from_settings(get_settings())
    selected = [fn for fn in CHECKS if opts.full or fn not in SLOW_CHECKS]
    logger.info("running %d check groups on %d thread(s)", len(selected), threads)

    def guarded(fn: Callable[[SuiteOptions], List[CheckResult]]) -> List[CheckResult]:
        try:
            return fn(opts)
        except Exception as exc:  # a crashing check is a failing check
            logger.exception("check group %s raised", fn.__name__)
            return [check(fn.__name__, False, detail=f"{type(exc).__name__}: {exc}")]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        groups = list(pool.map(guarded, selected))
    results = [r for group in groups for r in group]
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning("%d of %d checks failed: %s", len(failed), len(results), ", ".join(failed))
    else:
        logger.info("all %d checks passed", len(results))
    return results
