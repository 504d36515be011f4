"""
Martinet Engine - Exceptions

Every engine failure is a MartinetError carrying an ErrorCodes value, so the HTTP
and CLI surfaces can report it without inspecting the message.
"""

from typing import Optional

from response import ErrorCodes


class MartinetError(Exception):
    """Base class for all engine errors."""

    code = ErrorCodes.INTERNAL_ERROR


class ChartMismatchError(MartinetError):
    code = ErrorCodes.CHART_MISMATCH


class UnknownVariableError(MartinetError):
    code = ErrorCodes.UNKNOWN_VARIABLE


class DegreeError(MartinetError):
    code = ErrorCodes.DEGREE_ERROR


class NotClosedError(MartinetError):
    code = ErrorCodes.NOT_CLOSED


class DegenerateFormError(MartinetError):
    """The Martinet function vanishes identically at the working jet order."""

    code = ErrorCodes.DEGENERATE_FORM


class PreconditionError(MartinetError):
    code = ErrorCodes.PRECONDITION_FAILED


class InfeasibleError(MartinetError):
    """A linear system has no solution within the available jet."""

    code = ErrorCodes.INFEASIBLE

    def __init__(self, message: str, order: Optional[int] = None):
        super().__init__(message if order is None else f"{message} (order {order})")
        self.order = order


class SingularSystemError(MartinetError):
    code = ErrorCodes.SINGULAR_SYSTEM

    def __init__(self, message: str, density: Optional[float] = None):
        super().__init__(message)
        self.density = density


class FlowError(MartinetError):
    code = ErrorCodes.FLOW_ERROR


class ParseError(MartinetError):
    code = ErrorCodes.PARSE_ERROR

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class HarnessFailure(MartinetError):
    code = ErrorCodes.HARNESS_FAILURE

    def __init__(self, message: str, seed: int, trial: int):
        super().__init__(f"{message} (seed={seed} trial={trial})")
        self.seed = seed
        self.trial = trial
