"""
Pydantic Schemas for Run Reports.

A report is the serialized result of running a session: one entry per
command in declaration order, provenance tags for every reported number and
an overall completeness flag.
"""
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

REPORT_SCHEMA_VERSION = 1


class Provenance(str, Enum):
    COMPUTED = "computed"
    ASSERTED = "asserted-by-theorem"


class CommandStatus(str, Enum):
    OK = "ok"
    EQUIVALENCE_FAILURE = "equivalence-failure"
    ERROR = "error"
    RESOURCE_LIMIT = "resource-limit"


class CommandResult(BaseModel):
    """Result of one session command."""
    index: int = Field(..., ge=0, description="Position in the command list")
    command: str = Field(..., description="Command line as written (without 'cmd')")
    line: int = Field(default=0, ge=0, description="Line of the command in the session document")
    status: CommandStatus = CommandStatus.OK
    result: Dict[str, Any] = Field(default_factory=dict)
    provenance: Dict[str, Provenance] = Field(default_factory=dict)
    error: Optional[str] = None
    witness: Optional[Dict[str, Any]] = None
    wall_time: Optional[float] = Field(default=None, description="Seconds; only with --timings")


class Report(BaseModel):
    """Complete run report; ``schema`` versions the layout."""
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=REPORT_SCHEMA_VERSION, alias="schema")
    service: str
    version: str
    source: Optional[str] = None
    seed: int = 0
    complete: bool = True
    results: List[CommandResult] = Field(default_factory=list)
    wall_time: Optional[float] = None

    @property
    def failed(self) -> List[CommandResult]:
        return [r for r in self.results if r.status == CommandStatus.EQUIVALENCE_FAILURE]

    @property
    def errors(self) -> List[CommandResult]:
        return [r for r in self.results if r.status == CommandStatus.ERROR]
