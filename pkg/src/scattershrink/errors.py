"""Exception hierarchy shared by all scattershrink modules."""


class ScatterShrinkError(Exception):
    """Base class for errors raised by this package."""


class NotPositiveDefinite(ScatterShrinkError, ValueError):
    """A matrix expected to be Hermitian positive definite is not."""


class DimensionMismatch(ScatterShrinkError, ValueError):
    pass


class DomainError(ScatterShrinkError, ValueError):
    """An argument lies outside the domain of the function."""


class RankDeficient(ScatterShrinkError, ValueError):
    """The sample does not span the full space."""


class ConditionViolated(ScatterShrinkError):
    """A sample condition required for existence of a solution fails."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class MaxIterationsExceeded(ScatterShrinkError):
    """The fixed-point iteration did not converge.

    The best (last) iterate is available as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NormalizationViolated(ScatterShrinkError, ValueError):
    """A shape matrix does not satisfy ``tr(M^{-1}) = p``."""


class NotReal(ScatterShrinkError, ValueError):
    pass


class BudgetExceeded(ScatterShrinkError):
    """An exact combinatorial check would exceed its enumeration budget."""


class ZeroVector(ScatterShrinkError, ValueError):
    pass


class InputError(ScatterShrinkError):
    """Invalid user input (files, configuration); CLI exit code 2."""


class ParseError(InputError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ConfigError(InputError):
    """Configuration is invalid; ``problems`` lists every offending field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))
