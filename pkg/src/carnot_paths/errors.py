"""Exception hierarchy.

Validation problems derive from ``ValidationError`` (CLI exit code 2),
numerical failures from ``NumericalError`` (CLI exit code 3).
"""


class CarnotError(Exception):
    pass


class ValidationError(CarnotError, ValueError):
    pass


class NumericalError(CarnotError, RuntimeError):
    pass


class NotSkew(ValidationError):
    pass


class DependentSpan(ValidationError):
    pass


class BadDimensions(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class TruncationTooSmall(ValidationError):
    pass


class ZeroTarget(ValidationError):
    pass


class NotAMultiplier(ValidationError):
    pass


class NotNested(ValidationError):
    pass


class NotCommuting(ValidationError):
    pass


class NonGenericTarget(ValidationError):
    pass


class ConsistencyFailure(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass


class RankMismatch(NumericalError):
    pass


class DegeneratePencil(NumericalError):
    pass


class GuardViolated(NumericalError):
    pass
