"""Tests for input schemas, loaders and report export."""

import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
for p in (SRC, ROOT):
    if str(p) not in sys.path:
        sys.path.insert(0, str(p))

import numpy as np
import pytest
from pydantic import ValidationError

from teich.errors import InputFileError
from teich.services.export import dumps, rows_to_csv, to_jsonable, write_csv
from teich.services.io import (
    LambdaFile,
    Report,
    ShearFile,
    TriangulationFile,
    WeightFile,
    check,
    load_model,
    load_triangulation,
    parse_number,
)


def test_parse_number():
    assert parse_number(3) == Fraction(3)
    assert isinstance(parse_number(3), Fraction)
    assert parse_number("-7/4") == Fraction(-7, 4)
    assert parse_number(" 12 ") == Fraction(12)
    assert parse_number(0.25) == 0.25
    assert parse_number("1e-3") == 0.001
    for bad in (True, None, "x/y", "1/0", [1]):
        with pytest.raises(ValueError):
            parse_number(bad)


def test_weight_and_shear_files_parse_numbers():
    weights = WeightFile.model_validate({"weights": {"a": "1/3", "b": 2, "c": -0.5}})
    assert weights.weights == {"a": Fraction(1, 3), "b": Fraction(2), "c": -0.5}
    shears = ShearFile.model_validate({"shears": {"alpha": "0.5"}})
    assert shears.shears == {"alpha": 0.5}
    with pytest.raises(ValidationError):
        WeightFile.model_validate({"weights": {"a": "half"}})


def test_lambda_file_needs_exactly_one_kind():
    assert not LambdaFile.model_validate({"lambdas": {"alpha": 2}}).log_mode
    assert LambdaFile.model_validate({"log_lambdas": {"alpha": "1/2"}}).log_mode
    with pytest.raises(ValidationError):
        LambdaFile.model_validate({})
    with pytest.raises(ValidationError):
        LambdaFile.model_validate({"lambdas": {"alpha": 2}, "log_lambdas": {"alpha": 0}})


def test_load_model_and_digest(tmp_path):
    path = tmp_path / "tri.json"
    path.write_text(json.dumps({"triangles": [["a", "b", "c"], ["a", "b", "c"]]}), encoding="utf-8")
    parsed, digest = load_model(path, TriangulationFile)
    assert parsed.triangles[0] == ["a", "b", "c"]
    assert len(digest) == 64
    tri, again = load_triangulation(path)
    assert again == digest
    assert tri.signature == (1, 1)


def test_load_errors_are_input_errors(tmp_path):
    with pytest.raises(InputFileError):
        load_model(tmp_path / "missing.json", WeightFile)
    broken = tmp_path / "broken.json"
    broken.write_text("[1, 2", encoding="utf-8")
    with pytest.raises(InputFileError):
        load_model(broken, WeightFile)
    folded = tmp_path / "folded.json"
    folded.write_text(json.dumps({"triangles": [["a", "a", "b"], ["b", "c", "c"]]}), encoding="utf-8")
    with pytest.raises(InputFileError):
        load_triangulation(folded)


def test_report_passes_only_when_all_checks_pass():
    report = Report(command="demo")
    assert report.passed
    report.checks.append(check("one", True))
    report.checks.append(check("two", False, error=0.5))
    assert not report.passed
    assert [c.status for c in report.checks] == ["pass", "fail"]


@dataclass
class _Row:
    value: float
    exact: Fraction


def test_to_jsonable():
    assert to_jsonable(Fraction(-3, 4)) == "-3/4"
    assert to_jsonable(Fraction(5)) == "5/1"
    assert to_jsonable(complex(1.0, -2.0)) == {"re": 1.0, "im": -2.0}
    assert to_jsonable([math.inf, -math.inf]) == ["inf", "-inf"]
    assert to_jsonable(math.nan) == "nan"
    assert to_jsonable(np.array([[1, 2], [3, 4]])) == [[1, 2], [3, 4]]
    assert to_jsonable(np.float64(0.5)) == 0.5
    assert to_jsonable(_Row(0.1, Fraction(1, 3))) == {"value": 0.1, "exact": "1/3"}
    assert to_jsonable({1: (True, None)}) == {"1": [True, None]}


def test_dumps_is_deterministic():
    text = dumps({"b": Fraction(1, 2), "a": 0.1})
    assert text == '{\n  "a": 0.1,\n  "b": "1/2"\n}'
    report = Report(command="x", result={"z": complex(0.0, 1.0)})
    assert json.loads(dumps(report))["result"] == {"z": {"re": 0.0, "im": 1.0}}


def test_csv_rows(tmp_path):
    rows = [{"cutoff": 10.0, "delta": Fraction(1, 2), "extra": 1}, {"cutoff": 20.0}]
    text = rows_to_csv(rows, ["cutoff", "delta"])
    assert text.splitlines() == ["cutoff,delta", "10.0,1/2", "20.0,"]
    target = write_csv(tmp_path / "out.csv", rows, ["cutoff", "delta"])
    assert target.read_text(encoding="utf-8") == text
