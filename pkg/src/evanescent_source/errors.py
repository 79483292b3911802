"""Exception hierarchy shared by every module of the package."""


class SourceModelError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SourceModelError, ValueError):
    """An argument lies outside the domain where the model is defined."""


class InvalidInput(SourceModelError, ValueError):
    """Non-finite (NaN) input."""


class OverflowRegion(SourceModelError, OverflowError):
    """The requested value is not representable in double precision."""


class ConvergenceError(SourceModelError, ArithmeticError):
    """A numerical procedure did not reach its tolerance budget."""


class RangeError(SourceModelError, ValueError):
    """An expansion was requested outside its regime of validity."""


class PoleProximity(SourceModelError, ArithmeticError):
    """The steepest-descent path passes too close to the pole at k0."""


class QuiescenceViolated(SourceModelError, RuntimeError):
    """The far boundary of a grid simulation became active."""


class NoMinimum(SourceModelError, ArithmeticError):
    """No admissible interference minimum exists for the given point."""


class Undefined(SourceModelError, ArithmeticError):
    """A characteristic time is not defined (for instance, no R = 1 crossing)."""
