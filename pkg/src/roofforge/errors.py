"""Exception hierarchy.

Every error carries a stable ``name`` (the class name) so the CLI and the
HTTP service can emit machine-readable payloads without string matching.
"""

from __future__ import annotations


class RoofForgeError(Exception):
    """Base class for all package errors."""

    @property
    def name(self) -> str:
        return type(self).__name__

    def payload(self) -> dict:
        return {"error": self.name, "message": str(self)}


# graph-core -----------------------------------------------------------------

class GraphStructureError(RoofForgeError):
    """Roof graph violates a structural invariant."""


class FaceWithoutOutlineEdge(RoofForgeError):
    """A face has no outline edge, so it has no dual node."""


class NonRealizableAdjacency(RoofForgeError):
    """Completed dual graph cannot be drawn without crossings."""

    def __init__(self, message: str, offending: list[tuple] | None = None):
        super().__init__(message)
        self.offending = offending or []

    def payload(self) -> dict:
        out = super().payload()
        out["offending"] = [list(map(int, pair)) for pair in self.offending]
        return out


class DegenerateEdge(RoofForgeError):
    """Zero-length edge where a direction is required."""


# energy ---------------------------------------------------------------------

class TooFewPoints(RoofForgeError):
    """Face has too few points for the requested metric."""


# solver ---------------------------------------------------------------------

class SelfIntersectingOutline(RoofForgeError):
    """Outline polygon is not simple."""


class SingularSystem(RoofForgeError):
    """Linear system has no unique solution (disconnected interior)."""


class DegenerateGraph(RoofForgeError):
    """No roof vertices to optimize."""


class AllHeightsFree(RoofForgeError):
    """Variable-height solve needs at least one vertex pinned at zero."""


class InvalidInput2D(RoofForgeError):
    """2D embedding fails the validity check required for lifting."""


class InconsistentSystem(RoofForgeError):
    """Lifting system residual is too large to represent a planar roof."""


class NotConverged(RoofForgeError):
    """Optimization stopped before meeting tolerances (flag, rarely raised)."""


# editing --------------------------------------------------------------------

class InvalidTarget(RoofForgeError):
    """Edit references a vertex/edge/face that does not exist or is illegal."""


class WouldCreateDegenerateFace(RoofForgeError):
    """Edit would leave a face with fewer than 3 vertices."""


class RegionIsAllRoofVertices(RoofForgeError):
    """Affected region grew to the whole roof; a full re-solve is needed."""


# adjacency ------------------------------------------------------------------

class EmptyAdjacency(RoofForgeError):
    """No adjacency survives thresholding/cleanup."""


class CandidateExplosion(RoofForgeError):
    """Conflict enumeration exceeded its cap. Usually surfaced as a truncated
    candidate set rather than raised."""


# io -------------------------------------------------------------------------

class ParseError(RoofForgeError):
    """Input file is not valid JSON."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column

    def payload(self) -> dict:
        out = super().payload()
        if self.line is not None:
            out["line"] = self.line
            out["column"] = self.column
        return out


class SchemaError(RoofForgeError):
    """Input file parses as JSON but violates the schema."""


class NonPlanarInput(RoofForgeError):
    """Mesh export refused: roof faces are not planar enough."""
