"""
Schemas Package.

Contains Pydantic models for serialized run reports.
"""
from homascend.schemas.report import (
    REPORT_SCHEMA_VERSION,
    CommandResult,
    CommandStatus,
    Provenance,
    Report,
)

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "CommandResult",
    "CommandStatus",
    "Provenance",
    "Report",
]
