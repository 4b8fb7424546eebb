"""
Core Package.

Contains configuration, the error hierarchy, exact fields and linear algebra.
"""
from homascend.core.config import settings
from homascend.core.errors import (
    BoundsExceeded,
    EquivalenceViolation,
    FieldArithmeticError,
    HomascendError,
    HypothesisViolation,
    InsufficientPrecisionError,
    InvariantViolation,
    ReducibleModulusError,
    ResourceLimitExceeded,
    SessionParseError,
)
from homascend.core.fields import QQ, PrimeField, SimpleExtension
from homascend.core.linalg import Mat

__all__ = [
    "settings",
    "HomascendError",
    "FieldArithmeticError",
    "ReducibleModulusError",
    "InvariantViolation",
    "HypothesisViolation",
    "EquivalenceViolation",
    "InsufficientPrecisionError",
    "BoundsExceeded",
    "ResourceLimitExceeded",
    "SessionParseError",
    "QQ",
    "PrimeField",
    "SimpleExtension",
    "Mat",
]
