from typing import Any, Dict


class QuakebendError(Exception):
    """Base class for every error raised by quakebend.

    Args:
        message (str): Human readable description.
        witness (dict | None): JSON-serializable inputs sufficient to replay the failure.
    """

    exit_code = 1

    def __init__(self, message: str, witness: Dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.witness = witness


class ConfigError(QuakebendError):
    exit_code = 2


class PreconditionError(QuakebendError):
    """Caller supplied parameters that violate an operation's hypothesis."""

    exit_code = 2


class BudgetExceededError(QuakebendError):
    exit_code = 2


class WordError(QuakebendError, ValueError):
    exit_code = 2


class DegeneracyError(QuakebendError):
    """Numerical degeneracy: the computation has no stable answer at working tolerance."""

    exit_code = 3


class GeometryError(DegeneracyError):
    pass


class LogBranchError(DegeneracyError):
    pass


class CheckFailure(QuakebendError):
    exit_code = 4


class HomomorphismError(CheckFailure):
    pass
