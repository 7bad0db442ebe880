"""Report emission: one JSON document plus one CSV table per task result."""

import csv
import io
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import aiofiles

from src.events.bus import EventBus
from src.events.types import Event, EventType

from .exceptions import ReportError
from .tasks import table_names
from .types import Cell, ExperimentReport, ResultTable

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
FORMATS = ("json", "csv")


def format_cell(value: Cell) -> str:
    """Floats with 17 significant digits so they read back to the same double."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def render_csv(table: ResultTable) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(value) for value in row])
    return buffer.getvalue()


async def _write(path: Path, content: str) -> None:
    try:
        async with aiofiles.open(path, "w", encoding="utf-8", newline="") as f:
            await f.write(content)
    except OSError as e:
        raise ReportError(f"Failed to write {path}: {e}", {"path": str(path)}) from e


async def emit_report(
    report: ExperimentReport,
    out_dir: Union[str, Path],
    formats: Sequence[str] = FORMATS,
    event_bus: Optional[EventBus] = None,
) -> List[Path]:
    """Write the report files.

    Args:
        report: Experiment report
        out_dir: Output directory, created when missing
        formats: Any of ``json`` and ``csv``
        event_bus: Bus receiving one REPORT_WRITTEN event per file

    Returns:
        Paths written, JSON first, then CSV tables in result order

    Raises:
        ReportError: If a format is unknown or a file cannot be written
    """
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ReportError(f"Unknown report formats {sorted(unknown)}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportError(f"Cannot create output directory {out}: {e}", {"path": str(out)}) from e

    written: List[Path] = []
    if "json" in formats:
        path = out / REPORT_FILE
        await _write(path, report.model_dump_json(indent=2) + "\n")
        written.append(path)
    if "csv" in formats:
        for stem, result in zip(table_names(report.results), report.results):
            path = out / f"{stem}.csv"
            await _write(path, render_csv(result.table))
            written.append(path)

    for path in written:
        logger.debug(f"Wrote {path}")
        if event_bus is not None:
            await event_bus.publish(
                Event(type=EventType.REPORT_WRITTEN, data={"path": str(path)})
            )
    return written
