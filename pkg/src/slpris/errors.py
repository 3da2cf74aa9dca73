"""Exception hierarchy shared by the solver, simulation and CLI layers."""

import numpy as np


class SlpRisError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(SlpRisError, ValueError):
    pass


class ConvergenceFailure(SlpRisError, RuntimeError):
    """An iterative kernel hit its iteration cap.

    ``best`` holds the last (feasible) iterate so callers can inspect or
    reuse it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InfeasibleError(SlpRisError, RuntimeError):
    """The constraint system admits no point; ``rows`` lists the rows of the
    Farkas certificate (the constraints that cannot hold together)."""

    def __init__(self, message, rows=()):
        super().__init__(message)
        self.rows = tuple(int(r) for r in rows)


class SingularChannelError(SlpRisError, np.linalg.LinAlgError):
    pass


class UnsupportedConstellation(SlpRisError, ValueError):
    pass


class BudgetExceeded(SlpRisError, ValueError):
    pass


class ConfigError(SlpRisError, ValueError):
    """Configuration validation failure; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
