"""Exception hierarchy for the teich package.

Every failure the library signals is a ``TeichError``. The grouping
bases let callers (the CLI in particular) catch a whole family, while the
leaf classes name the exact precondition that was violated.
"""

from __future__ import annotations


class TeichError(Exception):
    """Root of all library errors."""

    pass


class InputFileError(TeichError):
    """Raised when an input file is missing, unreadable, or fails validation."""

    pass


# --- surface ---------------------------------------------------------------


class TriangulationError(TeichError):
    """Raised when a gluing does not describe a punctured surface we support."""

    pass


class EmptyInput(TriangulationError):
    """Raised when a triangulation has no triangles."""

    pass


class EdgeDegree(TriangulationError):
    """Raised when an edge label does not occur exactly twice."""

    pass


class NonsurfaceGluing(TriangulationError):
    """Raised when triangle sides do not glue into a connected surface."""

    pass


class SelfFolded(TriangulationError):
    """Raised when a triangle would carry both sides of one edge."""

    pass


# --- coords / symplectic -----------------------------------------------------


class CoordinateError(TeichError):
    """Raised for invalid coordinate or weight input."""

    pass


class MissingWeight(CoordinateError):
    """Raised when a weight or lambda-length is missing for some edge."""

    pass


class NonpositiveLambda(CoordinateError):
    """Raised when a lambda-length is zero or negative."""

    pass


class Unbalanced(CoordinateError):
    """Raised when a weight system fails the cusp balance condition."""

    pass


class LengthMismatch(CoordinateError):
    """Raised when two cusp sequences have different lengths."""

    pass


# --- hyperbolic / realization -----------------------------------------------


class GeometryError(TeichError):
    """Raised for degenerate hyperbolic-geometry input."""

    pass


class CoincidentPoints(GeometryError):
    """Raised when distinct ideal points were required but two coincide."""

    pass


class SingularArgument(GeometryError):
    """Raised at the logarithmic singularity u = ±1 of the kernel R."""

    pass


class OutOfRange(GeometryError):
    """Raised when a parameter lies outside its admissible interval."""

    pass


class NonpositiveParam(GeometryError):
    """Raised when a length or count parameter must be positive and is not."""

    pass


class NotInUpperHalfPlane(GeometryError):
    """Raised when a point is required to satisfy Im z > 0."""

    pass


class NumericBlowup(GeometryError):
    """Raised when a developed vertex degenerates or becomes non-finite."""

    pass


class IncompleteDevelopment(GeometryError):
    """Raised when a developed structure does not reach the requested data."""

    pass


class UndecoratedCusp(GeometryError):
    """Raised when horocycle data is requested from a shear-only development."""

    pass


# --- modular -----------------------------------------------------------------


class TessellationError(TeichError):
    """Raised for invalid modular-tessellation requests."""

    pass


class SeedNotPrimitive(TessellationError):
    """Raised when a seed line's coefficients share a common factor."""

    pass


class CutoffTooSmall(TessellationError):
    """Raised when a cutoff admits no ultraparallel line at all."""

    pass


class UnsupportedGroup(TessellationError):
    """Raised for groups other than the principal level-two congruence group."""

    pass


class NoIntersections(TessellationError):
    """Raised (in strict mode) when no lift of one geodesic crosses the other."""

    pass
