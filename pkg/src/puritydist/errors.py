"""Exception hierarchy shared by all modules."""


class PurityDistError(Exception):
    """Base class for errors raised by :mod:`puritydist`."""


class DomainError(PurityDistError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class NumericalError(PurityDistError, ArithmeticError):
    """A numerical procedure failed (quadrature, eigensolver, singular point)."""


class InsufficientPrecisionError(NumericalError):
    """The working precision cannot resolve an ill-conditioned linear system.

    Attributes
    ----------
    condition_estimate : float
        Order-of-magnitude estimate of the scaled matrix condition number.
    dps : int
        Working precision (decimal digits) that was attempted.
    """

    def __init__(self, message, condition_estimate=None, dps=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate
        self.dps = dps


class VerificationError(PurityDistError):
    """A computed density failed a self-consistency check."""
