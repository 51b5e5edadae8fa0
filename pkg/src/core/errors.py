"""
Exception hierarchy for fixcycle.
"""

from typing import Optional


class FixcycleError(Exception):
    """Base class for all fixcycle errors."""


class LabelingError(FixcycleError, ValueError):
    """Invalid label table, labeling, vertex id or path."""


class GroupError(LabelingError):
    """A Cayley table that does not describe a group."""


class FormatError(FixcycleError, ValueError):
    """A text file that does not follow its declared format."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CertificateError(FixcycleError, ValueError):
    """A certificate that fails verification where verification is required."""


class OracleLimitExceeded(FixcycleError, ValueError):
    """The brute-force oracle refuses an instance above its vertex limit."""


class FrontierExceeded(FixcycleError, ValueError):
    """The extremal search refuses an instance beyond its feasible frontier."""


class InvariantViolation(FixcycleError, RuntimeError):
    """A step that the correctness argument guarantees has failed."""
