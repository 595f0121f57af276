"""
Domain Exceptions - Failure modes of the reconciliation library.
Protocol-level failures (decoder σ, LDPC convergence) are data, not exceptions.
"""

from typing import Optional


class ReconciliationError(Exception):
    """Base class for every error raised by this package"""


class InvalidArgumentError(ReconciliationError, ValueError):
    """Raised when an operation receives arguments outside its domain"""


class FormatError(ReconciliationError, ValueError):
    """Raised when an interchange file or transcript cannot be parsed"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigurationError(ReconciliationError):
    """Raised when a session or campaign lacks a required resource"""


class NoCodeError(ConfigurationError):
    """Raised when no registered LDPC code qualifies for a QBER"""
