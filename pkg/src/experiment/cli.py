"""Command-line entry point: ``run`` a configuration or print its ``schema``."""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from src.events.bus import EventBus
from src.events.types import Event

from .exceptions import ConfigValidationError, ExperimentError
from .report import FORMATS, emit_report
from .runner import load_config, run_experiment
from .types import ExperimentConfig

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAILED_VERDICT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockspin-lattice", description="Run block-spin lattice experiments."
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: INFO)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run the tasks of a configuration")
    run.add_argument("config", type=Path, help="Path to the JSON configuration")
    run.add_argument("--out", type=Path, default=None, help="Output directory")
    run.add_argument(
        "--parallel",
        action="store_true",
        help="Run independent tasks concurrently (worker count from BLOCKSPIN_WORKERS)",
    )
    run.add_argument(
        "--format",
        default=None,
        help=f"Comma-separated report formats out of {','.join(FORMATS)}",
    )

    schema = commands.add_parser("schema", help="Write the configuration JSON schema")
    schema.add_argument("--out", type=Path, default=None, help="Schema file (default: stdout)")
    return parser


def _formats(raw: Optional[str], config: ExperimentConfig) -> List[str]:
    if raw is None:
        return list(config.formats)
    formats = [part.strip() for part in raw.split(",") if part.strip()]
    unknown = sorted(set(formats) - set(FORMATS))
    if unknown:
        raise ExperimentError(f"Unknown report formats {unknown}")
    return formats


async def _log_event(event: Event) -> None:
    logger.debug(f"{event.type.value}: {event.data}")


async def run_command(args: argparse.Namespace) -> int:
    """Run a configuration and emit its report; returns the exit code."""
    config = await load_config(args.config)
    formats = _formats(args.format, config)
    bus = EventBus()
    bus.subscribe_all(_log_event)
    delivery = asyncio.create_task(bus.start())
    try:
        report = await run_experiment(config, bus, args.parallel)
        written = await emit_report(report, args.out or Path(config.output_dir), formats, bus)
        await bus.join()
    finally:
        delivery.cancel()
    logger.info(f"Wrote {len(written)} report file(s); config hash {report.config_hash}")
    return EXIT_PASS if report.passed else EXIT_FAILED_VERDICT


def schema_command(args: argparse.Namespace) -> int:
    document = json.dumps(ExperimentConfig.model_json_schema(), indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(document)
    else:
        args.out.write_text(document, encoding="utf-8")
    return EXIT_PASS


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point.

    Exit codes: 0 when every verdict passes, 2 when some verdict failed,
    1 on configuration or execution errors.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "schema":
            return schema_command(args)
        return asyncio.run(run_command(args))
    except ConfigValidationError as e:
        for path, message in e.errors:
            logger.error(f"Config error at {path or '<root>'}: {message}")
        return EXIT_ERROR
    except ExperimentError as e:
        logger.error(e.message)
        return EXIT_ERROR
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
