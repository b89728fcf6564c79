"""Exception types shared across the package."""


class BandzerosError(Exception):
    """Base class for all package errors."""


class DomainError(BandzerosError):
    """A point lies where an operation is undefined (e.g. on the cut set E)."""


class WeightError(BandzerosError):
    """A weight specification violates a positivity or placement constraint."""


class QuadratureError(BandzerosError):
    """An integrand is non-finite at a node or fails a decay test."""


class NonConvergenceError(BandzerosError):
    """An iterative solver did not reach its residual target."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InvariantError(BandzerosError):
    """A mathematical invariant that should hold was violated numerically."""


class NearDegenerateWarning(UserWarning):
    """A pole or zero sits within 1e-8 of a branch point; results are flagged."""
