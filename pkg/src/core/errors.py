"""Exception hierarchy shared by every module.

Each exception class carries the process exit code the command line surface
reports for it.
"""

from typing import ClassVar, Optional


class ProtoDivError(Exception):
    """Base exception for all application errors."""

    exit_code: ClassVar[int] = 1


class InputValidationError(ProtoDivError):
    """Exception raised when an input violates an operation's precondition."""

    exit_code: ClassVar[int] = 2


class DimensionError(InputValidationError):
    """Exception raised when tensor shapes do not line up."""

    pass


class ConfigurationError(InputValidationError):
    """Exception raised when a configuration makes an operation undefined."""

    pass


class ArtifactExistsError(InputValidationError):
    """Exception raised when an output directory is non-empty and not forced."""

    pass


class ParseError(InputValidationError):
    """Exception raised when an input file cannot be parsed.

    Args:
        message: Human readable description of the problem.
        line: One-based line number of the offending row, if known.
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class NumericError(ProtoDivError):
    """Exception raised when a non-finite value appears in a computation."""

    exit_code: ClassVar[int] = 3


class TrainingAbortedError(NumericError):
    """Exception raised when training stops on a non-finite loss or gradient."""

    pass


class GenerationError(ProtoDivError):
    """Exception raised when synthetic generation cannot meet its label."""

    pass
