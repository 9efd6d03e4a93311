"""Decorated Teichmüller theory toolkit.

This package houses the combinatorics of ideal triangulations, Penner
coordinates, the Weil–Petersson forms in their several guises, planar
hyperbolic geometry, developing maps, and the modular tessellation
sums, together with the verification suites that exercise them.
"""

__version__ = "0.1.0"

__all__ = [
    "__version__",
]
