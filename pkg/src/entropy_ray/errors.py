"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance.

    The best iterate found so far is kept on ``best`` so callers can
    still inspect it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
