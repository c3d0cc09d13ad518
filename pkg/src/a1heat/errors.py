class A1HeatError(Exception):
    """Base class for errors raised by a1heat."""


class DomainError(A1HeatError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(A1HeatError, ValueError):
    """A grid, quadrature or solver configuration violates its invariants."""


class EvaluationError(A1HeatError, RuntimeError):
    """A numerical method failed to converge or disagreed with its oracle."""
