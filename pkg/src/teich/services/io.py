"""Input file schemas, loaders and the report model.

Every input is a small JSON document validated by a pydantic model.
Numbers may be JSON numbers or ``"p/q"`` strings; integers and rational
strings become ``Fraction`` so exact modes stay exact, floats stay float.
Anything unreadable or invalid surfaces as ``InputFileError``.
"""

from __future__ import annotations

import hashlib
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from teich.errors import InputFileError, TriangulationError
from teich.surface import IdealTriangulation, validate

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]
RawNumber = Union[int, float, str]

M = TypeVar("M", bound=BaseModel)


def parse_number(value: Any) -> Number:
    """int or "p/q" -> Fraction, float -> float.

    Raises:
        ValueError: anything else.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text or text.lstrip("+-").isdigit():
                return Fraction(text)
            return float(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a number: {value!r}") from exc
    raise ValueError(f"not a number: {value!r}")


def _parse_map(raw: Optional[Dict[str, RawNumber]]) -> Optional[Dict[str, Number]]:
    if raw is None:
        return None
    return {str(k): parse_number(v) for k, v in raw.items()}


class TriangulationFile(BaseModel):
    """Triangles as ccw triples of edge labels."""

    name: Optional[str] = Field(default=None, description="Free-form label")
    triangles: List[List[str]] = Field(..., description="Each triangle's three edge labels, counterclockwise")


class WeightFile(BaseModel):
    """Edge (or pillow geodesic) weights."""

    weights: Dict[str, Any] = Field(..., description="label -> number or 'p/q'")

    @field_validator("weights", mode="before")
    @classmethod
    def _numbers(cls, raw: Dict[str, RawNumber]) -> Dict[str, Number]:
        return _parse_map(raw)


class LambdaFile(BaseModel):
    """λ-lengths, or their exact logarithms for the formal-log mode."""

    lambdas: Optional[Dict[str, Any]] = Field(default=None, description="edge -> positive λ")
    log_lambdas: Optional[Dict[str, Any]] = Field(default=None, description="edge -> rational log λ")

    @field_validator("lambdas", "log_lambdas", mode="before")
    @classmethod
    def _numbers(cls, raw: Optional[Dict[str, RawNumber]]) -> Optional[Dict[str, Number]]:
        return _parse_map(raw)

    @model_validator(mode="after")
    def _exactly_one(self) -> "LambdaFile":
        if (self.lambdas is None) == (self.log_lambdas is None):
            raise ValueError("give exactly one of 'lambdas' and 'log_lambdas'")
        return self

    @property
    def log_mode(self) -> bool:
        return self.log_lambdas is not None


class ShearFile(BaseModel):
    """Shear coordinate per edge."""

    shears: Dict[str, Any] = Field(..., description="edge -> shear")

    @field_validator("shears", mode="before")
    @classmethod
    def _numbers(cls, raw: Dict[str, RawNumber]) -> Dict[str, Number]:
        return _parse_map(raw)


class CheckResult(BaseModel):
    """Outcome of one identity check."""

    name: str
    status: str = Field(..., description="'pass' or 'fail'")
    lhs: Any = None
    rhs: Any = None
    tolerance: Optional[float] = None
    error: Optional[float] = None
    detail: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


class Report(BaseModel):
    """What a CLI command prints."""

    command: str
    inputs: Dict[str, str] = Field(default_factory=dict, description="input name -> sha256 of the file")
    checks: List[CheckResult] = Field(default_factory=list)
    result: Any = None
    elapsed_seconds: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def check(name: str, ok: bool, **fields: Any) -> CheckResult:
    return CheckResult(name=name, status="pass" if ok else "fail", **fields)


def _read(path: str | Path) -> Tuple[Any, str]:
    target = Path(path)
    try:
        data = target.read_bytes()
    except OSError as exc:
        raise InputFileError(f"cannot read {target}: {exc}") from exc
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputFileError(f"{target} is not valid JSON: {exc}") from exc
    return payload, hashlib.sha256(data).hexdigest()


def load_model(path: str | Path, model: Type[M]) -> Tuple[M, str]:
    """Read and validate a JSON file; returns the model and the file's sha256."""
    payload, digest = _read(path)
    try:
        parsed = model.model_validate(payload)
    except ValidationError as exc:
        raise InputFileError(f"{path}: {exc}") from exc
    logger.debug("loaded %s from %s", model.__name__, path)
    return parsed, digest


def load_triangulation(path: str | Path) -> Tuple[IdealTriangulation, str]:
    """Validated triangulation; gluing errors are reported as file errors."""
    parsed, digest = load_model(path, TriangulationFile)
    try:
        return validate(parsed.triangles), digest
    except TriangulationError as exc:
        raise InputFileError(f"{path}: {exc}") from exc
