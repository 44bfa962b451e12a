"""Exception hierarchy shared by every module."""


class PartialBergmanError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PartialBergmanError, ValueError):
    """An argument lies outside the domain of the operation."""


class ParameterError(PartialBergmanError, ValueError):
    pass


class PositivityError(PartialBergmanError, ValueError):
    """The potential does not define a positive metric at the requested radius."""


class NumericalError(PartialBergmanError, ArithmeticError):
    pass


class UnsupportedDimensionError(PartialBergmanError, ValueError):
    pass


class DimensionError(PartialBergmanError, ValueError):
    pass


class InconclusiveError(PartialBergmanError):
    """A numerical test neither converged nor diverged within its budget."""


class DivergentIndexError(PartialBergmanError, ValueError):
    """The monomial z1^j z2^k does not have a finite norm at level m."""

    def __init__(self, m, j, k, reason):
        self.m, self.j, self.k, self.reason = m, j, k, reason
        super().__init__(f"divergent index (m={m}, j={j}, k={k}): {reason}")


class RangeError(PartialBergmanError, ValueError):
    pass


class OverflowBudgetError(PartialBergmanError, OverflowError):
    pass


class QuadratureBudgetError(PartialBergmanError):
    """Adaptive quadrature could not meet its tolerance within the subdivision budget."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class ToleranceUnreachableError(PartialBergmanError):
    """A series tail could not be certified below tolerance within the term budget."""

    def __init__(self, message, partial=None, tail_bound=None, terms_used=None):
        super().__init__(message)
        self.partial = partial
        self.tail_bound = tail_bound
        self.terms_used = terms_used


class LevelMismatchError(PartialBergmanError, ValueError):
    pass


class LevelTooSmallError(PartialBergmanError, ValueError):
    pass


class ConfigError(PartialBergmanError):
    """Configuration could not be parsed or validated."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
