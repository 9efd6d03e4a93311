"""Command-line entry point.

Every subcommand prints one JSON report on stdout (logs go to stderr).
Exit codes: 0 when all checks in the report pass, 1 when a check fails or
the library rejects the input, 2 for usage errors, 3 for unreadable or
invalid input files.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from typing import Any, Callable, Dict, Optional, Sequence

from teich import __version__
from teich.config.settings import get_settings
from teich.coords import (
    LambdaAssignment,
    coupling_residuals,
    cusp_shear_sums,
    formal_log_assignment,
    lambda_assignment,
    ptolemy_flip,
    shear_coords,
)
from teich.errors import InputFileError, TeichError
from teich.hyperbolic import (
    circuit_sum_asymptotic,
    circuit_sum_brute,
    gardiner_cusp_limit,
    gardiner_cusp_partial_sum,
    gardiner_tail_estimate,
    length_differential,
)
from teich.modular import dedekind_relation, shpr_pairing
from teich.realization import develop, edge_mismatch, holonomy_traces, measure_lambda
from teich.services import export
from teich.services.io import (
    LambdaFile,
    Report,
    ShearFile,
    WeightFile,
    check,
    load_model,
    load_triangulation,
)
from teich.services.logging_utils import configure_root
from teich.surface import IdealTriangulation, cusp_sums, epsilon_matrix, flip, is_balanced
from teich.symplectic import WP_FORMS, fock_check, lpr_check, omega_total, poisson_bracket, wp_shear_pairing
from teich.workers.suite_runner import SuiteOptions, run_suite

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace, Report], None]


# --- input helpers -------------------------------------------------------------------


def _triangulation(args: argparse.Namespace, report: Report) -> IdealTriangulation:
    tri, digest = load_triangulation(args.triangulation)
    report.inputs["triangulation"] = digest
    return tri


def _weights(path: str, label: str, report: Report) -> Dict[str, Any]:
    parsed, digest = load_model(path, WeightFile)
    report.inputs[label] = digest
    return parsed.weights


def _lambdas(tri: IdealTriangulation, path: str, report: Report) -> LambdaAssignment:
    parsed, digest = load_model(path, LambdaFile)
    report.inputs["lambdas"] = digest
    if parsed.log_mode:
        return formal_log_assignment(tri, parsed.log_lambdas)
    return lambda_assignment(tri, parsed.lambdas)


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


# --- subcommands ---------------------------------------------------------------------


def cmd_check(args: argparse.Namespace, report: Report) -> None:
    tri = _triangulation(args, report)
    result: Dict[str, Any] = {
        "genus": tri.genus,
        "punctures": tri.punctures,
        "edges": len(tri.edges),
        "triangles": len(tri.triangles),
        "cusp_links": [list(link.edge_sequence) for link in tri.links],
    }
    report.checks.append(check("valid-triangulation", True))
    if args.weights_a:
        weights = _weights(args.weights_a, "weights_a", report)
        result["cusp_sums"] = cusp_sums(tri, weights)
        report.checks.append(check("balanced", is_balanced(tri, weights, args.tolerance), lhs=result["cusp_sums"]))
    if args.lambdas:
        lam = _lambdas(tri, args.lambdas, report)
        residuals = coupling_residuals(tri, lam)
        ok = all(abs(float(lhs) - float(rhs)) <= args.tolerance * max(1.0, abs(float(lhs))) for lhs, rhs in residuals.values())
        report.checks.append(check("coupling", ok, lhs=residuals))
        shears = shear_coords(tri, lam)
        sums = cusp_shear_sums(tri, shears.values)
        result["shears"] = dict(shears.values)
        report.checks.append(
            check("cusp-shear-sums", all(abs(float(s)) <= args.tolerance for s in sums), lhs=sums, tolerance=args.tolerance)
        )
    report.result = result


def cmd_forms(args: argparse.Namespace, report: Report) -> None:
    tri = _triangulation(args, report)
    forms = {name: build(tri) for name, build in WP_FORMS.items()}
    first = forms["lambda"]
    report.result = {
        "edges": list(tri.edges),
        "forms": {name: form.as_lists() for name, form in forms.items()},
        "kernel_dimension": first.kernel_dimension(),
    }
    report.checks.append(check("forms-equal", all(form == first for form in forms.values())))


def cmd_bracket(args: argparse.Namespace, report: Report) -> None:
    tri = _triangulation(args, report)
    w_a = _weights(args.weights_a, "weights_a", report)
    w_b = _weights(args.weights_b, "weights_b", report)
    report.result = {
        "omega": omega_total(tri, w_a, w_b, threads=args.threads, tol=args.tolerance),
        "poisson_bracket": poisson_bracket(tri, w_a, w_b, threads=args.threads),
        "wp_shear_pairing": wp_shear_pairing(tri, w_a, w_b, threads=args.threads),
    }


def cmd_epsilon(args: argparse.Namespace, report: Report) -> None:
    tri = _triangulation(args, report)
    eps = epsilon_matrix(tri)
    report.result = {"edges": list(tri.edges), "epsilon": eps.tolist()}
    report.checks.append(check("antisymmetric", bool((eps == -eps.T).all())))
    report.checks.append(check("values-in-range", bool((abs(eps) <= 2).all())))


def cmd_fock_check(args: argparse.Namespace, report: Report) -> None:
    tri = _triangulation(args, report)
    fock = fock_check(tri, threads=args.threads)
    report.result = fock
    report.checks.append(check("fock-equals-wp", fock.passed, detail=str(fock.first_failure or "")))


def cmd_lpr_check(args: argparse.Namespace, report: Report) -> None:
    tri = _triangulation(args, report)
    lam = _lambdas(tri, args.lambdas, report)
    weights = _weights(args.weights_a, "weights_a", report)
    lpr = lpr_check(tri, lam, weights)
    report.result = lpr
    report.checks.append(check("lpr", lpr.passed, lhs=lpr.lhs_value, rhs=lpr.rhs_value))


def cmd_flip(args: argparse.Namespace, report: Report) -> None:
    tri = _triangulation(args, report)
    if args.lambdas:
        lam = _lambdas(tri, args.lambdas, report)
        new_tri, new_lam = ptolemy_flip(tri, lam, args.edge)
        report.result = {"triangles": [list(t) for t in new_tri.triangles], "lambdas": dict(new_lam.values)}
    else:
        new_tri = flip(tri, args.edge)
        report.result = {"triangles": [list(t) for t in new_tri.triangles]}


def cmd_develop(args: argparse.Namespace, report: Report) -> None:
    tri = _triangulation(args, report)
    if args.shears:
        parsed, digest = load_model(args.shears, ShearFile)
        report.inputs["shears"] = digest
        real = develop(tri, shears=parsed.shears, depth=args.depth)
    else:
        real = develop(tri, lam=_lambdas(tri, args.lambdas, report), depth=args.depth)
    result: Dict[str, Any] = {
        "placements": [
            {"triangle": node.triangle, "depth": node.depth, "parent": node.parent, "points": list(node.points())}
            for node in real.nodes
        ],
        "holonomy_traces": holonomy_traces(real),
    }
    if real.decorated:
        result["measured_lambdas"] = {e: measure_lambda(real, e) for e in tri.edges}
    mismatch = edge_mismatch(real)
    report.checks.append(check("edge-matching", mismatch <= 1e-10, error=mismatch, tolerance=1e-10))
    report.result = result


def cmd_circuit_sum(args: argparse.Namespace, report: Report) -> None:
    settings = get_settings()
    result: Dict[str, Any] = {"a": args.a, "ell": args.ell}
    if args.mode in ("brute", "both"):
        result["brute"] = circuit_sum_brute(args.a, args.ell, tail_tol=settings.tail_tol)
    if args.mode in ("asymptotic", "both"):
        result["asymptotic"] = circuit_sum_asymptotic(args.a, args.ell, convention=args.convention)
    if args.mode == "both":
        result["difference"] = result["brute"].value - result["asymptotic"]
    report.result = result
    if args.csv:
        row = {"a": args.a, "ell": args.ell, "convention": args.convention}
        if "brute" in result:
            row.update(brute=result["brute"].value, tail_bound=result["brute"].tail_bound)
        row.update({k: result[k] for k in ("asymptotic", "difference") if k in result})
        export.write_csv(args.csv, [row], ["a", "ell", "convention", "brute", "tail_bound", "asymptotic", "difference"])


def cmd_gardiner(args: argparse.Namespace, report: Report) -> None:
    partial = gardiner_cusp_partial_sum(args.z, args.N)
    limit = gardiner_cusp_limit(args.z)
    report.result = {
        "z": args.z,
        "N": args.N,
        "value": partial,
        "limit": limit,
        "difference": abs(partial - limit),
        "tail_bound": gardiner_tail_estimate(args.z, args.N),
        "length_differential": length_differential(args.z),
    }


_SHELL_FIELDS = ["cutoff", "partial_sum_323", "partial_sum_2", "delta", "error", "terms"]


def cmd_dedekind(args: argparse.Namespace, report: Report) -> None:
    cutoff = args.cutoff if args.cutoff is not None else get_settings().dedekind_cutoff
    dedekind = dedekind_relation(cutoff, threads=args.threads)
    report.result = dedekind
    if args.csv:
        export.write_csv(args.csv, [export.to_jsonable(row) for row in dedekind.table], _SHELL_FIELDS)


def cmd_shpr(args: argparse.Namespace, report: Report) -> None:
    cutoff = args.cutoff if args.cutoff is not None else get_settings().dedekind_cutoff
    w_a = _weights(args.A, "A", report)
    w_b = _weights(args.B, "B", report)
    ledger = shpr_pairing(
        {k: float(v) for k, v in w_a.items()},
        {k: float(v) for k, v in w_b.items()},
        cutoff,
        group=args.group,
        threads=args.threads,
    )
    report.result = ledger
    if args.csv:
        rows = [export.to_jsonable(entry) for entry in ledger.entries]
        export.write_csv(args.csv, rows, ["kind", "first", "second", "weight", "datum", "count", "value"])


def cmd_suite(args: argparse.Namespace, report: Report) -> None:
    opts = SuiteOptions.from_settings(get_settings(), full=args.full, trials=args.trials)
    report.checks.extend(run_suite(opts, threads=args.threads))


# --- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=settings.threads, help="worker threads")
    common.add_argument("--tolerance", type=float, default=settings.tolerance, help="float tolerance for checks")
    common.add_argument("--timing", action="store_true", help="include elapsed time in the report")

    parser = argparse.ArgumentParser(prog="teich", description="Decorated Teichmüller space computations and checks")
    parser.add_argument("--version", action="version", version=f"teich {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Handler, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add("check", cmd_check, "validate a triangulation, optionally weights and lambda-lengths")
    p.add_argument("--triangulation", required=True)
    p.add_argument("--weights-a")
    p.add_argument("--lambdas")

    p = add("forms", cmd_forms, "the four constructions of the WP form")
    p.add_argument("--triangulation", required=True)

    p = add("bracket", cmd_bracket, "omega, Poisson bracket and WP pairing of two weight systems")
    p.add_argument("--triangulation", required=True)
    p.add_argument("--weights-a", required=True)
    p.add_argument("--weights-b", required=True)

    p = add("epsilon", cmd_epsilon, "the Fock exchange matrix")
    p.add_argument("--triangulation", required=True)

    p = add("fock-check", cmd_fock_check, "omega(W_e, W_f) against 2 epsilon_ef")
    p.add_argument("--triangulation", required=True)

    p = add("lpr-check", cmd_lpr_check, "balanced length as a linear function of the shears")
    p.add_argument("--triangulation", required=True)
    p.add_argument("--lambdas", required=True)
    p.add_argument("--weights-a", required=True)

    p = add("flip", cmd_flip, "flip an edge, updating lambda-lengths when given")
    p.add_argument("--triangulation", required=True)
    p.add_argument("--edge", required=True)
    p.add_argument("--lambdas")

    p = add("develop", cmd_develop, "develop into the upper half-plane")
    p.add_argument("--triangulation", required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--shears")
    source.add_argument("--lambdas")
    p.add_argument("--depth", type=int, default=4)

    p = add("circuit-sum", cmd_circuit_sum, "circuit sum by brute force and by its expansion")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--ell", type=float, required=True)
    p.add_argument("--mode", choices=("brute", "asymptotic", "both"), default="both")
    p.add_argument("--convention", choices=("gamma", "shifted"), default="gamma")
    p.add_argument("--csv")

    p = add("gardiner", cmd_gardiner, "partial sums of the cusp series")
    p.add_argument("--z", type=_complex, required=True, help="point of the upper half-plane, e.g. 0.37+0.59i")
    p.add_argument("--N", type=int, default=100_000)

    p = add("dedekind", cmd_dedekind, "distance relation of the modular tessellation")
    p.add_argument("--cutoff", type=float)
    p.add_argument("--csv")

    p = add("shpr", cmd_shpr, "ideal geodesic gradient pairing on the gamma2 pillow")
    p.add_argument("--group", default="gamma2")
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--csv")

    p = add("suite", cmd_suite, "run the acceptance battery")
    p.add_argument("--full", action="store_true", help="include the slow Dedekind convergence checks")
    p.add_argument("--trials", type=_positive_int, help="trials for every randomized check (default: per-check settings)")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        parser.print_usage(sys.stderr)
        print("teich: error: --threads must be >= 1", file=sys.stderr)
        return 2

    report = Report(command=args.command)
    started = time.perf_counter()
    try:
        args.handler(args, report)
    except InputFileError as exc:
        print(f"teich: input error: {exc}", file=sys.stderr)
        return 3
    except TeichError as exc:
        print(f"teich: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.timing:
        report.elapsed_seconds = time.perf_counter() - started
    sys.stdout.write(export.dumps(report) + "\n")
    if not report.passed:
        logger.warning("%s: %d check(s) failed", args.command, sum(1 for c in report.checks if not c.passed))
        return 1
    return 0


def main() -> None:
    configure_root(get_settings().log_level)
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
