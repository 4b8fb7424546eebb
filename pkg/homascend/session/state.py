"""
Session State Definitions.

A session is the parsed form of a session document: named declarations in
declaration order, the command list and the run configuration.
"""
from contextlib import contextmanager
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple, TypedDict

from pydantic import BaseModel, ConfigDict, Field

from homascend.core.config import settings
from homascend.core.errors import InvariantViolation


class DeclKind(str, Enum):
    FIELD = "field"
    ALGEBRA = "algebra"
    MAP = "map"
    MODULE = "module"
    COMPLEX = "complex"
    PID = "pid"


@dataclass(frozen=True)
class Declaration:
    kind: DeclKind
    ident: str
    value: Any
    line: int
    extra: Dict[str, Any] = dc_field(default_factory=dict)


@dataclass(frozen=True)
class Command:
    index: int
    name: str
    args: Tuple[str, ...]
    options: Tuple[Tuple[str, str], ...]
    line: int

    @property
    def text(self) -> str:
        opts = [f"{k}={v}" for k, v in self.options]
        return " ".join((self.name,) + self.args + tuple(opts))


class SessionConfig(BaseModel):
    """Per-run overrides of the global settings, validated to their documented ranges."""
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default_factory=lambda: settings.SEED)
    ext_range: int = Field(default_factory=lambda: settings.EXT_RANGE, ge=0, le=32)
    precision: int = Field(default_factory=lambda: settings.PID_PRECISION, ge=1, le=256)
    search_dim_cap: int = Field(default_factory=lambda: settings.SEARCH_DIM_CAP, ge=1, le=64)
    threads: int = Field(default_factory=lambda: settings.THREADS, ge=1, le=64)
    timeout: Optional[float] = Field(default_factory=lambda: settings.TIMEOUT_SECS, gt=0)


class Session(TypedDict):
    """Declarations keyed by identifier (insertion order = declaration order)."""
    declarations: Dict[str, Declaration]
    commands: List[Command]
    config: SessionConfig
    source: Optional[str]


def create_session(config: Optional[SessionConfig] = None, source: Optional[str] = None) -> Session:
    """
    Factory function to create an empty session.

    Args:
        config: Run configuration (defaults from settings)
        source: Name of the session document, for diagnostics

    Returns:
        Empty Session
    """
    return Session(
        declarations={},
        commands=[],
        config=config or SessionConfig(),
        source=source,
    )


def declare(session: Session, decl: Declaration) -> None:
    previous = session["declarations"].get(decl.ident)
    if previous is not None:
        raise InvariantViolation(f"identifier {decl.ident!r} already declared on line {previous.line}")
    session["declarations"][decl.ident] = decl


def lookup(session: Session, ident: str, kind: DeclKind) -> Declaration:
    decl = session["declarations"].get(ident)
    if decl is None:
        raise InvariantViolation(f"undeclared identifier {ident!r}")
    if decl.kind != kind:
        raise InvariantViolation(f"{ident!r} is a {decl.kind.value}, expected a {kind.value}")
    return decl


def counts(session: Session) -> Dict[str, int]:
    out: Dict[str, int] = {}
    for decl in session["declarations"].values():
        out[decl.kind.value] = out.get(decl.kind.value, 0) + 1
    return out


_OVERRIDES = {
    "seed": "SEED",
    "ext_range": "EXT_RANGE",
    "precision": "PID_PRECISION",
    "search_dim_cap": "SEARCH_DIM_CAP",
    "threads": "THREADS",
    "timeout": "TIMEOUT_SECS",
}


@contextmanager
def configured(config: SessionConfig) -> Iterator[None]:
    """Apply the session configuration to the global settings for one run."""
    saved = {attr: getattr(settings, attr) for attr in _OVERRIDES.values()}
    try:
        for key, attr in _OVERRIDES.items():
            setattr(settings, attr, getattr(config, key))
        yield
    finally:
        for attr, value in saved.items():
            setattr(settings, attr, value)
