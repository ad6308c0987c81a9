"""Exception hierarchy shared by every module."""


class DiffeoError(Exception):
    """Base class for all errors raised by diffeolab."""


class DimensionMismatch(DiffeoError, ValueError):
    pass


class SubstitutionOutsideClass(DiffeoError, ValueError):
    """An affine substitution would need |L(x)| for a non-axis linear form L."""


class BreakLocusUnsupported(DiffeoError, ValueError):
    """Absolute value of something other than a (scaled) coordinate monomial."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class InvalidSubspace(DiffeoError, ValueError):
    pass


class UnsupportedOperation(DiffeoError, ValueError):
    pass


class NotBaseIdentity(DiffeoError, ValueError):
    pass


class PointDimMismatch(DimensionMismatch):
    pass


class IrrationalBreakpoint(DiffeoError, ValueError):
    pass


class UnsupportedBaseDim(DiffeoError, ValueError):
    pass


class BaseMismatch(DiffeoError, ValueError):
    pass


class NonCoordinateSubspace(DiffeoError, ValueError):
    pass


class LiftNotSmooth(DiffeoError, ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class LiftNotLinear(DiffeoError, ValueError):
    pass


class FNotInjective(DiffeoError, ValueError):
    pass


class ProjectionMismatch(DiffeoError, ValueError):
    pass


class HypothesisFailed(DiffeoError):
    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class WitnessMismatch(DiffeoError):
    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class StrataMismatch(DiffeoError, ValueError):
    pass


class NotAPseudometric(DiffeoError, ValueError):
    def __init__(self, message: str, side: str):
        super().__init__(message)
        self.side = side


class Incompatible(DiffeoError, ValueError):
    pass


class ParseError(DiffeoError):
    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = expected
        detail = f"{message} at line {line}, column {column}"
        if expected:
            detail += f" (expected one of: {', '.join(expected)})"
        super().__init__(detail)
