"""Small numerical kernels shared across modules.

``CompensatedSum`` is a double-word accumulator built on Knuth's two-sum:
the sum is held as an unevaluated pair ``(s, t)`` with ``s + t`` the
exact running total up to one rounding per addition of the low word.
``log_gamma`` is Stirling's series with an upward shift, accurate to
about 1e-15 on the positive axis.
"""

from __future__ import annotations

import math
from typing import Iterable, Tuple

# Bernoulli-number coefficients B_{2k} / (2k (2k-1)) of the Stirling series.
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)

_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def two_sum(u: float, v: float) -> Tuple[float, float]:
    """Error-free transformation: return (s, t) with s = fl(u + v), u + v = s + t."""
    s = u + v
    up = s - v
    vpp = s - up
    up -= u
    vpp -= v
    return s, -(up + vpp)


class CompensatedSum:
    """Running compensated sum (double-word two-sum accumulator)."""

    def __init__(self, value: float = 0.0) -> None:
        self._s = float(value)
        self._t = 0.0
        self.count = 0

    def add(self, value: float) -> "CompensatedSum":
        y, u = two_sum(float(value), self._t)
        self._s, self._t = two_sum(y, self._s)
        if self._s == 0.0:
            self._s = u
        else:
            self._t += u
        self.count += 1
        return self

    def extend(self, values: Iterable[float]) -> "CompensatedSum":
        for v in values:
            self.add(v)
        return self

    @property
    def value(self) -> float:
        return self._s + self._t

    def __float__(self) -> float:
        return self.value


def compensated_sum(values: Iterable[float]) -> float:
    """Sum an iterable with ``CompensatedSum``."""
    return CompensatedSum().extend(values).value


def log_gamma(x: float) -> float:
    """log Γ(x) for x > 0 via Stirling's series after shifting x past 10.

    Raises:
        ValueError: if x is not positive.
    """
    if not x > 0:
        raise ValueError(f"log_gamma needs x > 0, got {x!r}")
    shift = 0.0
    while x < 10.0:
        shift += math.log(x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv
    for coeff in _STIRLING:
        series += coeff * power
        power *= inv2
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_TWO_PI + series - shift
