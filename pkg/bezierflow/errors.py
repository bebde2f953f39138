"""
Exception hierarchy shared by the library and the command line.
Each exception class carries the process exit code the CLI reports for it.
"""
from typing import Optional


class BezierFlowError(Exception):
    """Base class for every error raised by bezierflow"""

    exit_code: int = 1


class ArgumentError(BezierFlowError, ValueError):
    """An argument is out of range, non-finite or has the wrong shape"""

    exit_code = 2


class DataError(BezierFlowError, ValueError):
    """Input data (files, user functions) is malformed or non-finite"""

    exit_code = 2


class FormatError(DataError):
    """A file could not be decoded; offset is the byte position of the problem"""

    def __init__(self, message: str, offset: Optional[int] = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class SingularConfigurationError(BezierFlowError):
    """Collocation nodes do not define an invertible system"""

    exit_code = 3


class DiscontinuityError(BezierFlowError):
    """Values that must coincide at a join or at the closure point do not"""

    exit_code = 3


class DegenerateError(BezierFlowError):
    exit_code = 5


class DegenerateTangentError(DegenerateError):
    """The curve has a zero tangent at a sampling node, so no normal exists there"""

    def __init__(self, patch: int, node: int, speed: float):
        super().__init__(f"zero tangent at patch {patch}, node {node} (|gamma'| = {speed:.3e})")
        self.patch = patch
        self.node = node


class DegenerateGradientError(DegenerateError):
    """A shape gradient is undefined at the requested point"""


class DegenerateCurveError(DegenerateError):
    """The curve collapsed (for example to a single point)"""


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the process exit code used by the command line
    """
    if isinstance(error, BezierFlowError):
        return error.exit_code
    return 1
