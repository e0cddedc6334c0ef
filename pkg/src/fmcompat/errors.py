"""Exception hierarchy.

Every error raised by the library derives from :class:`GeometryError`; the
class name doubles as the machine-readable error code emitted by the CLI.
"""


class GeometryError(Exception):
    """Base class for all library errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class ZeroInput(GeometryError, ValueError):
    pass


class RankMismatch(GeometryError, ValueError):
    pass


class LinesIdentical(GeometryError, ValueError):
    pass


class DegenerateFrame(GeometryError, ValueError):
    pass


class NoUniqueSolution(GeometryError):
    pass


class CentersCoincide(GeometryError, ValueError):
    pass


class NotRankTwo(GeometryError, ValueError):
    pass


class MissingPair(GeometryError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class MissingAuxiliary(GeometryError, ValueError):
    pass


class DegenerateLine(GeometryError, ValueError):
    pass


class SingularTransform(GeometryError, ValueError):
    pass


class AmbiguousClassification(GeometryError):
    pass


class WrongCase(GeometryError):
    pass


class AuxiliaryDegenerate(GeometryError):
    pass


class DegenerateReconstruction(GeometryError):
    pass


class ReconstructionFailed(GeometryError):
    pass


class NotCompatible(GeometryError):
    pass


class FrameSamplingFailed(GeometryError):
    pass


class NoAnchorPair(GeometryError):
    pass


class GeneratorExhausted(GeometryError):
    pass


class InvalidDocument(GeometryError, ValueError):
    """Malformed JSON input document."""
