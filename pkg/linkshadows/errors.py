"""Exception hierarchy for linkshadows.

Every error raised by the library derives from :class:`LinkShadowError`, grouped by the module that
raises it. Report objects (validation, trace verification, catalog diffs) never raise; they carry
their findings instead.
"""


class LinkShadowError(Exception):
    """Base class for all linkshadows errors."""


# =============================================================================
# diagram_core
# =============================================================================


class DiagramError(LinkShadowError):
    """A rotation system violates a structural invariant of a shadow."""


class DuplicateDart(DiagramError):
    """A dart is listed more than once in the rotations or the involution."""


class UnpairedDart(DiagramError):
    """A dart has no partner, or the pairing has a fixed point."""


class WrongDegree(DiagramError):
    """A vertex rotation does not have exactly four darts."""


class Disconnected(DiagramError):
    """The underlying graph is not connected."""


class NonPlanar(DiagramError):
    """The face count contradicts Euler's formula for the sphere."""


class UnknownVertex(DiagramError):
    """A vertex id is out of range."""


class BadSize(DiagramError):
    """A requested crossing count is out of range."""


# =============================================================================
# tangle_analysis
# =============================================================================


class TangleError(LinkShadowError):
    """A substructure query cannot be answered on this diagram."""


class CyclicGroupHasNoEnds(TangleError):
    """The closed 2-braid of a torus shadow has no end darts."""


class SubgroupRangeError(TangleError):
    """A subgroup range is empty or leaves the group."""


class NotPrime(TangleError):
    """The diagram has an edge cut of size at most two."""


class NotReduced(TangleError):
    """The diagram has a loop edge."""


class NotComponentCrossing(TangleError):
    """The crossing joins two different link components."""


class NotFullProper(TangleError):
    """The vertex set does not form a tangle with a single edge face."""


# =============================================================================
# rewrite_moves
# =============================================================================


class MoveError(LinkShadowError):
    """A rewrite cannot be applied to the given operand."""


class BadIncidence(MoveError):
    """Only 4-tangles and 6-tangles can be turned."""


class CyclicGroup(MoveError):
    """Turning the whole closed 2-braid is undefined."""


class NotOtsTriangle(MoveError):
    """The operand is not a facial triangle with simply connected vertex pairs."""


class NotTwoGroup(MoveError):
    """The operand is not a pair of crossings joined by a bigon."""


class TriangleTouchesTwoGroup(MoveError):
    """A triangle edge lies on the boundary of a 2-group."""


class TriangleNotInRegion(MoveError):
    """The triangle's face is not inside the region."""


# =============================================================================
# reduction_pipeline
# =============================================================================


class PipelineError(LinkShadowError):
    """The reduction could not be carried out."""


class NotAdjacentInCondensation(PipelineError):
    """The two groups do not form a 2-group in the condensation."""


class NotLoner(PipelineError):
    """The first group of a loner sequence has more than one crossing."""


class NotAligned(PipelineError):
    """The groups cannot be brought into the aligned triangle configuration."""


class LabelNormalizationImpossible(PipelineError):
    """No labelling of the triangle satisfies the odd-size convention."""


class SearchExhausted(PipelineError):
    """A bounded search ran out of depth or states."""


class MirrorMismatch(PipelineError):
    """A diagram-level phase did not reproduce its condensation-level target."""


# =============================================================================
# orbit_enumeration
# =============================================================================


class EnumerationError(LinkShadowError):
    """Catalog construction or comparison failed."""


class DepthLimitHit(EnumerationError):
    """The orbit search stopped at its depth limit."""


class SizeTooLarge(EnumerationError):
    """Brute-force generation was asked for too many crossings."""


class MismatchedSize(EnumerationError):
    """Two catalogs for different crossing counts were compared."""


# =============================================================================
# cli_toolkit
# =============================================================================


class FormatError(LinkShadowError):
    """A file could not be read or written in the expected format."""


class DiagramSyntaxError(FormatError):
    """A diagram file is malformed.

    Attributes:
        line: 1-based line number of the offending input.
        column: 1-based column number, or 0 when the whole line is at fault.
    """

    def __init__(self, message: str, line: int, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
