# src/galgeo/base.py
from typing import Optional, Tuple


class GalgeoError(Exception):
    """Base class for every error raised by the galgeo library."""
    pass


# ---------- expression errors ----------
class ExpressionParseError(GalgeoError):
    """Raised when a formula cannot be turned into an expression tree."""

    def __init__(self, message: str, position: Optional[int] = None, source: str = "") -> None:
        self.position = position
        self.source = source
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class ExpressionSyntaxError(ExpressionParseError):
    pass


class UnknownIdentifierError(ExpressionParseError):
    pass


class IndexRangeError(ExpressionParseError):
    """Variable index outside [1, n] for the ambient dimension."""
    pass


class EvaluationDomainError(GalgeoError):
    """Raised when an expression is evaluated outside its domain.

    `subexpression` is the printed form of the node that failed.
    """

    def __init__(self, reason: str, subexpression: str = "") -> None:
        self.reason = reason
        self.subexpression = subexpression
        text = f"{reason}: {subexpression}" if subexpression else reason
        super().__init__(text)


# ---------- geometry errors ----------
class DegreeOverflowError(GalgeoError):
    pass


class SingularCoframeError(GalgeoError):
    pass


class SingularMatrixError(GalgeoError):
    pass


class InvariantDriftError(GalgeoError):
    """Group block structure drifted during integration."""
    pass


# ---------- input errors ----------
class SystemFileError(GalgeoError):
    pass


class SymmetryViolationError(SystemFileError):
    def __init__(self, index: Tuple[int, int, int]) -> None:
        self.index = index
        super().__init__(f"symmetry violation at {index}")


class SamplingExhaustedError(GalgeoError):
    """Too many random points fell outside the domain of the system."""
    pass


class ArgumentSpecError(GalgeoError):
    """Malformed point, grid or initial-condition specification."""
    pass
