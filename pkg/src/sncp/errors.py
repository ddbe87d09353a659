"""Exception hierarchy shared by all modules."""


class SncpError(Exception):
    """Base class for package errors."""


class DomainError(SncpError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class RangeError(SncpError, ValueError):
    """A value cannot be realized by any admissible configuration."""


class ValidationError(SncpError, ValueError):
    """An input object violates one of its invariants."""


class InvariantViolation(SncpError, RuntimeError):
    """Two routes that must agree did not."""


class UnstableEstimateError(SncpError, RuntimeError):
    """A Monte Carlo ratio denominator is not resolved away from zero."""


class PreconditionError(SncpError, ValueError):
    """The inputs of a check do not satisfy its stated preconditions."""
