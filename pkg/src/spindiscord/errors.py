"""Exception types shared across the package."""


class SpinDiscordError(Exception):
    """Base class for every error raised by spindiscord."""


class DomainError(SpinDiscordError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class PreconditionError(SpinDiscordError, ValueError):
    """Inputs are well-typed but do not meet an operation's requirements."""


class QuadratureError(SpinDiscordError, ArithmeticError):
    """Adaptive quadrature exhausted its subdivision budget."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class ConsistencyError(SpinDiscordError, ArithmeticError):
    """A computed object violates an invariant it must satisfy by construction."""


class ConvergenceError(SpinDiscordError, ArithmeticError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
