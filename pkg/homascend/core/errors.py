"""
Error Hierarchy.

Every failure raised by the engine derives from HomascendError so that the
command-line edge can map it to an exit status in one place.
"""
from typing import Any, Dict, Optional


class HomascendError(Exception):
    """Base class for all engine errors."""


class FieldArithmeticError(HomascendError, ArithmeticError):
    """Division by zero or an otherwise undefined field operation."""


class ReducibleModulusError(FieldArithmeticError):
    """A simple extension was built on a reducible polynomial."""


class InvariantViolation(HomascendError, ValueError):
    """A constructed object fails one of its structural invariants."""

    def __init__(self, message: str, detail: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.detail = detail or {}


class HypothesisViolation(HomascendError, ValueError):
    """An operation was called on input outside its hypotheses."""

    def __init__(self, message: str, clause: Optional[str] = None):
        super().__init__(message)
        self.clause = clause


class EquivalenceViolation(HomascendError, AssertionError):
    """Two independently computed sides of an equivalence disagree."""

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.witness = witness or {}


class InsufficientPrecisionError(HomascendError):
    """A truncated-series computation changed between precision p and p+1."""


class BoundsExceeded(HomascendError, ValueError):
    """A parameter lies outside the configured search bounds."""


class ResourceLimitExceeded(HomascendError):
    """The run deadline expired, or a search stopped at its configured limit undecided."""


class SessionParseError(HomascendError):
    """Syntax or verification error in a session document."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message
