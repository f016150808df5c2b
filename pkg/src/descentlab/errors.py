"""Exception types shared across the library."""


class DescentLabError(Exception):
    """Base class for all descentlab errors."""


class ContractViolationError(DescentLabError):
    """An input violated a documented precondition (dimension, range, state)."""


class NumericalFailureError(DescentLabError):
    """A non-finite value or gradient appeared during iteration.

    Carries the index of the offending iterate.
    """

    def __init__(self, message, iterate_index):
        super().__init__(message)
        self.iterate_index = iterate_index


class NonConvergenceError(DescentLabError):
    """An inner solver exhausted its iteration budget.

    Carries the best residual achieved so the caller can distinguish
    "tolerance too tight" from "genuinely stuck".
    """

    def __init__(self, message, best_residual):
        super().__init__(message)
        self.best_residual = best_residual


class InsufficientDataError(DescentLabError):
    """Too few usable iterates for a trajectory fit."""


class BasinAmbiguityError(DescentLabError):
    """Two critical-point records both claim a trajectory limit; tolerances are misconfigured."""


class InapplicableError(DescentLabError):
    """A check was requested outside the region where its certificate holds."""
