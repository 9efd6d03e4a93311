"""Tests for the command-line entry point: reports, files and exit codes."""

import json
import sys
from fractions import Fraction
from pathlib import Path
from unittest.mock import patch

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
for p in (SRC, ROOT):
    if str(p) not in sys.path:
        sys.path.insert(0, str(p))

import pytest

from teich.cli import run

TORUS = {"name": "torus", "triangles": [["alpha", "beta", "gamma"], ["alpha", "beta", "gamma"]]}
PILLOW = {"triangles": [["alpha", "beta", "gamma"], ["alpha", "gamma", "beta"]]}


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def _report(capsys):
    return json.loads(capsys.readouterr().out)


def test_check_valid_torus(tmp_path, capsys):
    tri = _write(tmp_path, "torus.json", TORUS)
    assert run(["check", "--triangulation", tri]) == 0
    report = _report(capsys)
    assert report["command"] == "check"
    assert report["result"]["genus"] == 1
    assert report["result"]["punctures"] == 1
    assert report["result"]["cusp_links"] == [["alpha", "gamma", "beta", "alpha", "gamma", "beta"]]
    assert len(report["inputs"]["triangulation"]) == 64


def test_check_reports_unbalanced_weights(tmp_path, capsys):
    tri = _write(tmp_path, "torus.json", TORUS)
    weights = _write(tmp_path, "w.json", {"weights": {"alpha": 1, "beta": 0, "gamma": 0}})
    assert run(["check", "--triangulation", tri, "--weights-a", weights]) == 1
    report = _report(capsys)
    statuses = {c["name"]: c["status"] for c in report["checks"]}
    assert statuses == {"valid-triangulation": "pass", "balanced": "fail"}


def test_check_with_lambdas(tmp_path, capsys):
    tri = _write(tmp_path, "torus.json", TORUS)
    lam = _write(tmp_path, "lam.json", {"lambdas": {"alpha": 2, "beta": "3", "gamma": "5/2"}})
    assert run(["check", "--triangulation", tri, "--lambdas", lam]) == 0
    report = _report(capsys)
    assert set(report["result"]["shears"]) == {"alpha", "beta", "gamma"}


def test_bracket_is_exact(tmp_path, capsys):
    tri = _write(tmp_path, "torus.json", TORUS)
    first = _write(tmp_path, "a.json", {"weights": {"alpha": 1, "beta": 0, "gamma": -1}})
    second = _write(tmp_path, "b.json", {"weights": {"alpha": 0, "beta": 1, "gamma": -1}})
    assert run(["bracket", "--triangulation", tri, "--weights-a", first, "--weights-b", second]) == 0
    result = _report(capsys)["result"]
    assert Fraction(result["omega"]) == -1
    assert Fraction(result["poisson_bracket"]) == -2
    assert Fraction(result["wp_shear_pairing"]) == Fraction(-1, 2)


def test_epsilon_and_forms(tmp_path, capsys):
    tri = _write(tmp_path, "torus.json", TORUS)
    assert run(["epsilon", "--triangulation", tri]) == 0
    assert _report(capsys)["result"]["epsilon"] == [[0, -2, 2], [2, 0, -2], [-2, 2, 0]]
    assert run(["forms", "--triangulation", tri]) == 0
    result = _report(capsys)["result"]
    assert result["kernel_dimension"] == 1
    assert set(result["forms"]) == {"lambda", "h_triangles", "h_cusps", "lambda_sigma"}


def test_fock_and_lpr_checks(tmp_path, capsys):
    tri = _write(tmp_path, "torus.json", TORUS)
    assert run(["fock-check", "--triangulation", tri]) == 0
    capsys.readouterr()
    logs = _write(tmp_path, "logs.json", {"log_lambdas": {"alpha": "1/2", "beta": -1, "gamma": 3}})
    weights = _write(tmp_path, "w.json", {"weights": {"alpha": 1, "beta": -1, "gamma": 0}})
    assert run(["lpr-check", "--triangulation", tri, "--lambdas", logs, "--weights-a", weights]) == 0
    assert _report(capsys)["checks"][0]["status"] == "pass"


def test_flip_with_lambdas(tmp_path, capsys):
    tri = _write(tmp_path, "torus.json", TORUS)
    lam = _write(tmp_path, "lam.json", {"lambdas": {"alpha": 2, "beta": 3, "gamma": 5}})
    assert run(["flip", "--triangulation", tri, "--edge", "alpha", "--lambdas", lam]) == 0
    result = _report(capsys)["result"]
    assert result["lambdas"]["alpha"] == "17/1"
    assert len(result["triangles"]) == 2


def test_flip_rejected_by_library(tmp_path, capsys):
    tri = _write(tmp_path, "pillow.json", PILLOW)
    assert run(["flip", "--triangulation", tri, "--edge", "alpha"]) == 1
    assert "SelfFolded" in capsys.readouterr().err


def test_develop(tmp_path, capsys):
    tri = _write(tmp_path, "torus.json", TORUS)
    shears = _write(tmp_path, "s.json", {"shears": {"alpha": 0.5, "beta": -0.25, "gamma": -0.25}})
    assert run(["develop", "--triangulation", tri, "--shears", shears, "--depth", "2", "--timing"]) == 0
    report = _report(capsys)
    assert report["result"]["placements"][0]["points"] == [-1.0, 0.0, "inf"]
    assert report["result"]["holonomy_traces"][0] == pytest.approx(2.0, abs=1e-9)
    assert report["elapsed_seconds"] >= 0.0


def test_circuit_sum_writes_csv(tmp_path, capsys):
    out = tmp_path / "circuit.csv"
    assert run(["circuit-sum", "--a", "0.5", "--ell", "0.1", "--mode", "asymptotic", "--csv", str(out)]) == 0
    assert "asymptotic" in _report(capsys)["result"]
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "a,ell,convention,brute,tail_bound,asymptotic,difference"
    assert lines[1].startswith("0.5,0.1,gamma,,,")


def test_dedekind_reports_both_limits(tmp_path, capsys):
    out = tmp_path / "shells.csv"
    assert run(["dedekind", "--cutoff", "100", "--csv", str(out)]) == 0
    result = _report(capsys)["result"]
    assert result["limit"] == pytest.approx(0.99545)
    assert result["target"] == pytest.approx(-6.851233, abs=1e-5)
    assert len(out.read_text(encoding="utf-8").splitlines()) == 5


def test_gardiner(capsys):
    assert run(["gardiner", "--z", "0.37+0.59i", "--N", "1000"]) == 0
    result = _report(capsys)["result"]
    assert set(result["value"]) == {"re", "im"}
    assert result["tail_bound"] == pytest.approx(2e-3)


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["no-such-command"],
        ["circuit-sum", "--a", "0.5"],
        ["gardiner", "--z", "not-a-number"],
        ["suite", "--threads", "0"],
        ["suite", "--trials", "0"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == 2


def test_suite_trials_flag_reaches_every_check(capsys):
    with patch("teich.cli.run_suite", return_value=[]) as fake:
        assert run(["suite", "--trials", "3"]) == 0
    opts = fake.call_args.args[0]
    assert (opts.trials, opts.realization_trials, opts.coordinate_trials) == (3, 3, 3)
    assert _report(capsys)["command"] == "suite"


def test_develop_needs_exactly_one_source(tmp_path):
    tri = _write(tmp_path, "torus.json", TORUS)
    shears = _write(tmp_path, "s.json", {"shears": {"alpha": 0, "beta": 0, "gamma": 0}})
    lam = _write(tmp_path, "lam.json", {"lambdas": {"alpha": 1, "beta": 1, "gamma": 1}})
    assert run(["develop", "--triangulation", tri]) == 2
    assert run(["develop", "--triangulation", tri, "--shears", shears, "--lambdas", lam]) == 2


def test_input_errors_exit_3(tmp_path, capsys):
    missing = str(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    single = _write(tmp_path, "single.json", {"triangles": [["a", "b", "c"]]})
    wrong_shape = _write(tmp_path, "shape.json", {"edges": []})
    for path in (missing, str(broken), single, wrong_shape):
        assert run(["check", "--triangulation", path]) == 3
    tri = _write(tmp_path, "torus.json", TORUS)
    both = _write(tmp_path, "both.json", {"lambdas": {"alpha": 1}, "log_lambdas": {"alpha": 0}})
    assert run(["check", "--triangulation", tri, "--lambdas", both]) == 3
    assert "input error" in capsys.readouterr().err


def test_main_exits_with_run_status(tmp_path, monkeypatch, capsys):
    """main() configures logging and exits with run()'s code."""
    from teich.cli import main

    tri = _write(tmp_path, "torus.json", TORUS)
    monkeypatch.setattr(sys, "argv", ["teich", "epsilon", "--triangulation", tri])
    with pytest.raises(SystemExit) as exc:
        main()
    assert exc.value.code == 0
    assert _report(capsys)["command"] == "epsilon"
