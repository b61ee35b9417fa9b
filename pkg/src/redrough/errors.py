"""Exception hierarchy shared by every module of the package."""


class RoughPathError(Exception):
    """Base class for all errors raised by redrough."""


class DimensionMismatch(RoughPathError, ValueError):
    pass


class IndexOutOfRange(RoughPathError, IndexError):
    pass


class InvalidExponent(RoughPathError, ValueError):
    pass


class GridMismatch(RoughPathError, ValueError):
    pass


class ExponentMismatch(RoughPathError, ValueError):
    pass


class NonMonotoneTriple(RoughPathError, ValueError):
    pass


class BaseMismatch(RoughPathError, ValueError):
    """A controlled path was combined with a rough path it is not controlled by."""


class BoundPreconditionViolated(RoughPathError, ValueError):
    pass


class OrderUnavailable(RoughPathError, ValueError):
    pass


class UnknownCurve(RoughPathError, ValueError):
    pass


class UnknownField(RoughPathError, ValueError):
    pass


class InvalidHurst(RoughPathError, ValueError):
    pass


class EmbeddingFailure(RoughPathError):
    pass


class NumericalFailure(RoughPathError):
    """Base for failures of the numerical procedures themselves."""


class NonFiniteOutput(NumericalFailure, FloatingPointError):
    pass


class StepTooSmall(NumericalFailure):
    pass


class MaxItersExceeded(NumericalFailure):
    pass
