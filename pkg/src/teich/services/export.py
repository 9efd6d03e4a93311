"""JSON and CSV export of reports.

Reports are dataclasses, pydantic models or plain containers holding
ints, Fractions, floats, complex numbers and numpy values. ``to_jsonable``
flattens all of them: Fractions become ``"p/q"`` strings, complex numbers
``{"re": .., "im": ..}`` objects and non-finite floats the strings
``"inf"``, ``"-inf"`` and ``"nan"``. Floats keep their shortest
round-trip representation.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np
from pydantic import BaseModel

logger = logging.getLogger(__name__)


def _float(value: float) -> Any:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def to_jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return _float(value)
    if isinstance(value, complex):
        return {"re": _float(value.real), "im": _float(value.imag)}
    if isinstance(value, np.ndarray):
        return [to_jsonable(x) for x in value.tolist()]
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(x) for x in value]
    if isinstance(value, (set, frozenset)):
        return sorted((to_jsonable(x) for x in value), key=repr)
    return str(value)


def dumps(value: Any) -> str:
    """Deterministic JSON: sorted keys, two-space indent."""
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2, ensure_ascii=False)


def rows_to_csv(rows: Iterable[Dict[str, Any]], fieldnames: Sequence[str]) -> str:
    """Render rows as CSV text with a header line."""
    output = io.StringIO()
    writer = csv.DictWriter(
        output,
        fieldnames=list(fieldnames),
        extrasaction="ignore",
        lineterminator="\n",
        quoting=csv.QUOTE_MINIMAL,
    )
    writer.writeheader()
    for row in rows:
        writer.writerow({k: to_jsonable(v) for k, v in row.items()})
    return output.getvalue()


def write_csv(path: str | Path, rows: List[Dict[str, Any]], fieldnames: Sequence[str]) -> Path:
    target = Path(path)
    target.write_text(rows_to_csv(rows, fieldnames), encoding="utf-8")
    logger.info("wrote %d rows to %s", len(rows), target)
    return target
