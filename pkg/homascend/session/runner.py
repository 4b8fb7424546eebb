"""
Session Runner.

Executes the commands of a parsed session, optionally on a thread pool, and
merges the results in command order so that the report does not depend on
scheduling. Failures are confined to the command that raised them.
"""
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

from homascend.core.cancellation import CancellationToken
from homascend.core.config import settings
from homascend.core.errors import (
    BoundsExceeded,
    EquivalenceViolation,
    HomascendError,
    ResourceLimitExceeded,
)
from homascend.schemas.report import CommandResult, CommandStatus, Report
from homascend.session.commands import execute, plain
from homascend.session.state import Command, Session, configured

logger = logging.getLogger(__name__)


class OutputFormat:
    TEXT = "text"
    JSON = "json"


def _run_one(session: Session, command: Command, token: CancellationToken, timings: bool) -> CommandResult:
    start = time.perf_counter()
    base = {"index": command.index, "command": command.text, "line": command.line}
    try:
        outcome = execute(session, command, token)
        result = CommandResult(**base, result=outcome.result, provenance=outcome.provenance)
    except EquivalenceViolation as e:
        logger.error(f"[{command.index}] {command.text}: equivalence failed: {e}")
        result = CommandResult(
            **base, status=CommandStatus.EQUIVALENCE_FAILURE, error=str(e), witness=plain(e.witness)
        )
    except (ResourceLimitExceeded, BoundsExceeded) as e:
        logger.warning(f"[{command.index}] {command.text}: {e}")
        result = CommandResult(**base, status=CommandStatus.RESOURCE_LIMIT, error=str(e))
    except HomascendError as e:
        logger.warning(f"[{command.index}] {command.text}: {type(e).__name__}: {e}")
        result = CommandResult(**base, status=CommandStatus.ERROR, error=f"{type(e).__name__}: {e}")
    except Exception as e:
        logger.exception(f"[{command.index}] {command.text} failed unexpectedly")
        result = CommandResult(**base, status=CommandStatus.ERROR, error=f"{type(e).__name__}: {e}")
    if timings:
        result.wall_time = round(time.perf_counter() - start, 6)
    return result


def run(session: Session, timings: bool = False, token: Optional[CancellationToken] = None) -> Report:
    """Run every command; the report is complete unless a resource bound was hit."""
    config = session["config"]
    commands = session["commands"]
    start = time.perf_counter()
    with configured(config):
        token = token or CancellationToken(config.timeout)
        if config.threads > 1 and len(commands) > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                results: List[CommandResult] = list(
                    pool.map(lambda c: _run_one(session, c, token, timings), commands)
                )
        else:
            results = [_run_one(session, c, token, timings) for c in commands]
    report = Report(
        service=settings.SERVICE_NAME,
        version=settings.SERVICE_VERSION,
        source=session["source"],
        seed=config.seed,
        complete=all(r.status != CommandStatus.RESOURCE_LIMIT for r in results),
        results=results,
        wall_time=round(time.perf_counter() - start, 6) if timings else None,
    )
    logger.info(f"Ran {len(results)} commands: {len(report.failed)} failed, {len(report.errors)} errors")
    return report


def exit_code(report: Report) -> int:
    """0 all assertions hold, 1 equivalence failure, 2 command error, 3 resource bound."""
    if report.failed:
        return 1
    if not report.complete:
        return 3
    if report.errors:
        return 2
    return 0


# =========================================================================
# EMIT
# =========================================================================

def _format_value(value) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False)


def _emit_text(report: Report) -> str:
    lines = [f"{report.service} {report.version}  source={report.source or '-'}  seed={report.seed}"]
    if not report.results:
        lines.append("(no commands)")
    for r in report.results:
        header = f"[{r.index}] {r.command}  {r.status.value}"
        if r.wall_time is not None:
            header += f"  ({r.wall_time:.3f}s)"
        lines.append(header)
        for key in sorted(r.result):
            tag = r.provenance.get(key)
            suffix = f"  [{tag.value}]" if tag is not None and tag.value != "computed" else ""
            lines.append(f"    {key}: {_format_value(r.result[key])}{suffix}")
        if r.error:
            lines.append(f"    error: {r.error}")
        if r.witness:
            lines.append(f"    witness: {_format_value(r.witness)}")
    if not report.complete:
        lines.append("report incomplete: a resource bound was exceeded")
    return "\n".join(lines) + "\n"


def emit(report: Report, fmt: str = OutputFormat.TEXT) -> bytes:
    """Serialize a report; JSON output has sorted keys and is byte-stable for a fixed seed."""
    if fmt == OutputFormat.JSON:
        payload = report.model_dump(mode="json", by_alias=True)
        return (json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt == OutputFormat.TEXT:
        return _emit_text(report).encode("utf-8")
    raise ValueError(f"unknown output format {fmt!r}")
