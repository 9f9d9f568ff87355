"""Exception types shared across the package."""

from __future__ import annotations


class SetupError(ValueError):
    """Invalid problem data (non-SPD Gram matrix, inconsistent shapes, ...)."""


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class SolverError(RuntimeError):
    """A step solve did not reach the requested residual.

    Carries the step index (``None`` for a standalone solve) and the best
    iterate seen so far.
    """

    def __init__(self, message, step=None, best_w=None, best_xi=None, best_residual=float("inf")):
        super().__init__(message)
        self.step = step
        self.best_w = best_w
        self.best_xi = best_xi
        self.best_residual = best_residual


class OracleError(RuntimeError):
    """The scalar brute-force oracle found no certified root."""


class ConfigError(ValueError):
    """Configuration file does not match the schema."""

    def __init__(self, message, path=""):
        super().__init__(message)
        self.path = path


class ReferenceFailure(RuntimeError):
    """The fine reference trajectory of a study could not be built."""
