"""
Custom exception classes for the certificate pipeline.

Every error carries the process exit code the command line reports for it:
2 for invalid input, 1 for inconclusive runs and 3 for internal failures.
"""

from typing import Optional


class QscError(Exception):
    """Base class for all pipeline errors"""

    exit_code: int = 3

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidInputError(QscError):
    """Raised when user-supplied input is malformed (exit 2)"""

    exit_code = 2


class QscSyntaxError(InvalidInputError):
    """Raised for parse errors, carrying a source position"""

    def __init__(
        self,
        detail: str,
        line: Optional[int] = None,
        col: Optional[int] = None,
        source: Optional[str] = None,
    ):
        location = ""
        if line is not None:
            location = f"{source or '<input>'}:{line}:{col or 0}: "
        super().__init__(f"{location}{detail}")
        self.line = line
        self.col = col
        self.source = source


class ArityError(InvalidInputError):
    """Raised when a point or update does not match the variables in use"""


class UnsupportedPatternError(InvalidInputError):
    """Raised when a temporal formula matches no known automaton pattern"""


class UnsupportedTemplateError(InvalidInputError):
    """Raised when a template configuration cannot be built"""


class ConfigurationError(InvalidInputError):
    """Raised for inconsistent job configuration"""


class NonCompactDomainError(InvalidInputError):
    """Raised when a Handelman relaxation needs a bounded domain"""

    def __init__(self, variable: str, context: str = ""):
        suffix = f" ({context})" if context else ""
        super().__init__(
            f"domain is unbounded in variable '{variable}'{suffix}; "
            "declare an invariant box or a frame"
        )
        self.variable = variable


class EmptyRegionError(QscError):
    """Raised when a region expected to be non-empty is empty (exit 3)"""


class TotalityError(QscError):
    """Raised when no command fires at a state (exit 3)"""


class InconclusiveError(QscError):
    """Raised when no verdict could be reached (exit 1)"""

    exit_code = 1


class SolverError(QscError):
    """Raised when the external solver fails to run (exit 1)"""

    exit_code = 1


class FrameEscapeError(ConfigurationError):
    """Raised when a one-step image of an invariant leaves the frame"""

    def __init__(self, detail: str, point: Optional[dict] = None):
        super().__init__(detail)
        self.point = point
