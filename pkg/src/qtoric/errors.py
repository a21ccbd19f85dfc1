"""Exception hierarchy shared by every module."""


class QtoricError(ValueError):
    """Base class for all library errors."""


class DimensionMismatch(QtoricError):
    pass


class Unbounded(QtoricError):
    pass


class Degenerate(QtoricError):
    pass


class NonIntegerNormal(QtoricError):
    pass


class RankDeficient(QtoricError):
    pass


class AmbientTooLarge(QtoricError):
    pass


class DependentColumns(QtoricError):
    pass


class NotReduced(QtoricError):
    pass


class PatternPresent(QtoricError):
    pass


class Unsupported(QtoricError):
    pass


class ZeroInverse(QtoricError):
    pass


class NotOnSphere(QtoricError):
    pass


class InvalidSampleCount(QtoricError):
    pass


class OutsidePolytope(QtoricError):
    pass


class NotOnLevelSet(QtoricError):
    pass


class InconsistentSystem(QtoricError):
    pass


class ZeroHomogeneousVector(QtoricError):
    pass


class ImproperCut(QtoricError):
    pass


class NotDelzantAfterCut(QtoricError):
    pass


class NonRegularValue(QtoricError):
    pass


class ParseError(QtoricError):
    pass


class SchemaVersionMismatch(QtoricError):
    pass
