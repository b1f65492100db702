"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised on malformed arrays, mismatched shapes or out-of-range parameters."""


class ProjectionError(RuntimeError):
    """An iterative projection failed to reach its tolerance.

    The best iterate found and its residual are kept so callers can inspect
    or accept them.
    """

    def __init__(self, message, best=None, residual=float("nan")):
        super().__init__(message)
        self.best = best
        self.residual = residual


class RecoveryError(RuntimeError):
    """A solver ended on the zero matrix, so no direction can be returned."""
