"""Exception types shared across the package."""


class MagicQPTError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(MagicQPTError, ValueError):
    """An argument violates a documented precondition."""


class NumericalError(MagicQPTError, ArithmeticError):
    """A numerical consistency check failed (NaN, imaginary residual, negative log argument...)."""


class ConvergenceError(NumericalError):
    """An iterative solver did not reach its tolerance.

    Attributes
    ----------
    best_residual : float
        Smallest residual norm observed before giving up.
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message, best_residual=float("nan"), iterations=0):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


class ReconstructionError(NumericalError):
    """A density matrix rebuilt from correlators is not positive."""


class EdgeExtremumError(MagicQPTError, ValueError):
    """The requested extremum sits on the edge of the search window."""


class UnreliableFitError(MagicQPTError, ValueError):
    """A finite-size-scaling fit cannot be trusted (e.g. C(N) - C changes sign)."""


class SweepError(MagicQPTError):
    """A sweep point failed; ``x`` is the control value, ``__cause__`` the solver error."""

    def __init__(self, x, cause):
        super().__init__(f"sweep failed at x = {x!r}: {cause}")
        self.x = x
        self.cause = cause

    def __reduce__(self):
        return (type(self), (self.x, self.cause))
