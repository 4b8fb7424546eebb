"""
Session Package.

Parses session documents and runs their commands into reports.
"""
from homascend.session.parser import parse_session
from homascend.session.runner import emit, exit_code, run
from homascend.session.state import Session, SessionConfig, create_session

__all__ = [
    "parse_session",
    "run",
    "emit",
    "exit_code",
    "Session",
    "SessionConfig",
    "create_session",
]
