"""Exception types raised by the numerical layers."""


class WavobsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(WavobsError, ValueError):
    """Argument outside the interval on which a function is defined."""


class BasisIndexError(WavobsError, IndexError):
    """Mode index outside the range of a basis family."""


class ConvergenceError(WavobsError, RuntimeError):
    pass


class NotSPDError(WavobsError, ValueError):
    """Cholesky factorization failed."""


class SingularMatrixError(WavobsError, ValueError):
    def __init__(self, message, condition=float("inf")):
        super().__init__(f"{message} (estimated condition number {condition:.3e})")
        self.condition = condition


class ExpmOverflowError(WavobsError, OverflowError):
    pass


class UnsupportedFormulationError(WavobsError, ValueError):
    pass


class NearSingularGramianError(WavobsError, ValueError):
    """The Gramian system cannot be solved; carries the observability constant."""

    def __init__(self, message, c_NT):
        super().__init__(f"{message} (smallest pencil eigenvalue c_NT = {c_NT:.3e})")
        self.c_NT = c_NT
