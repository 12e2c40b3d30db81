"""Exception hierarchy. CLI exit codes are attached to the classes."""


class MetareactorError(Exception):
    exit_code = 1


class DomainError(MetareactorError, ValueError):
    """Input outside the mathematical domain of an operation."""

    exit_code = 2


class ConfigError(MetareactorError):
    exit_code = 2


class BesselAccuracyError(MetareactorError, ArithmeticError):
    """Series and asymptotic Bessel evaluations disagree."""


class SingularityError(MetareactorError, ArithmeticError):
    pass


class ConvergenceError(MetareactorError):
    """Iterative solver failed to reach its tolerance."""

    exit_code = 3

    def __init__(self, message, residual=None, history=None):
        super().__init__(message)
        self.residual = residual
        self.history = list(history or [])


class FitError(MetareactorError):
    exit_code = 3


class BracketError(MetareactorError, ValueError):
    exit_code = 4


class InfeasibleError(MetareactorError):
    exit_code = 4


class UnreachableTargetError(InfeasibleError):
    pass


class ThermoRangeError(DomainError):
    pass
