"""
homascend - Command-Line Entry Point.

Runs session documents and gallery items and writes the report to stdout.
Logs go to stderr. Exceptions are mapped to exit statuses here and nowhere
else: 0 ok, 1 equivalence failure, 2 usage or parse error, 3 resource bound.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from homascend.core.config import settings
from homascend.core.errors import SessionParseError
from homascend.services.gallery import GALLERY_ITEMS
from homascend.session.parser import parse_session
from homascend.session.runner import OutputFormat, emit, exit_code, run
from homascend.session.state import SessionConfig

log = logging.getLogger(__name__)


def _configure_logging() -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if settings.DEBUG else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help=f"Random seed (default: {settings.SEED})")
    parser.add_argument(
        "--format",
        choices=[OutputFormat.TEXT, OutputFormat.JSON],
        default=OutputFormat.TEXT,
        help="Report format (default: text)",
    )
    parser.add_argument("--timeout", type=float, default=None, help="Seconds before the run is cut short")
    parser.add_argument("--threads", type=int, default=None, help="Concurrent commands (default: HOMASCEND_THREADS)")
    parser.add_argument("--timings", action="store_true", help="Include wall times in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homascend",
        description="Ascent and descent of module structures along local homomorphisms.",
    )
    sub = parser.add_subparsers(dest="action", required=True)

    run_parser = sub.add_parser("run", help="Run a session document")
    run_parser.add_argument("session", type=Path, help="Path to the session file")
    _common_flags(run_parser)

    gallery_parser = sub.add_parser("gallery", help="Reproduce one counterexample")
    gallery_parser.add_argument("item", choices=GALLERY_ITEMS, help="Gallery item")
    gallery_parser.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Item parameter (p, N, n, L). Repeatable.",
    )
    _common_flags(gallery_parser)
    return parser


def _overrides(args: argparse.Namespace) -> SessionConfig:
    values = {"seed": args.seed, "timeout": args.timeout, "threads": args.threads}
    return SessionConfig(**{k: v for k, v in values.items() if v is not None})


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging()

    log.info("=" * 60)
    log.info(f"Starting {settings.SERVICE_NAME} v{settings.SERVICE_VERSION}")
    log.info("=" * 60)
    log.info(f"Environment: {settings.ENV}")

    try:
        config = _overrides(args)
    except ValueError as e:
        print(f"homascend: invalid option: {e}", file=sys.stderr)
        return 2

    if args.action == "run":
        source = str(args.session)
        try:
            text = args.session.read_text(encoding="utf-8")
        except OSError as e:
            print(f"homascend: cannot read {source}: {e}", file=sys.stderr)
            return 2
    else:
        source = f"gallery {args.item}"
        bad = [p for p in args.param if "=" not in p]
        if bad:
            print(f"homascend: --param expects KEY=VALUE, got {bad[0]!r}", file=sys.stderr)
            return 2
        text = " ".join(["cmd", "gallery", args.item] + args.param)

    try:
        session = parse_session(text, source=source, config=config)
    except SessionParseError as e:
        print(f"{source}:{e.line}:{e.column}: {e.reason}", file=sys.stderr)
        return 2

    report = run(session, timings=args.timings)
    sys.stdout.buffer.write(emit(report, args.format))
    sys.stdout.flush()
    code = exit_code(report)
    for failure in report.failed:
        log.error(f"Equivalence failure in [{failure.index}] {failure.command}: {failure.witness}")
    log.info(f"Finished with exit status {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
