"""Writing and reading experiment reports."""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any

from ..models.report import ExperimentReport
from .errors import ReportIOError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


def format_value(value: Any) -> str:
    """CSV cell text: floats with 17 significant digits, everything else as str."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def emit_report(report: ExperimentReport, path: Path, fmt: str = "csv") -> Path:
    """Write the report as CSV (fixed header) or as a schema-versioned JSON envelope.

    Args:
        report: Report to write
        path: Destination file; parent directories are created
        fmt: "csv" or "json"

    Returns:
        The path written
    """
    if fmt not in FORMATS:
        raise ReportIOError(f"unknown report format {fmt!r}", {"formats": list(FORMATS)})
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            with open(path, "w", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(report.columns)
                for row in report.rows:
                    writer.writerow([format_value(row[c]) for c in report.columns])
        else:
            with open(path, "w") as f:
                json.dump(report.to_dict(), f, indent=2)
                f.write("\n")
    except OSError as e:
        raise ReportIOError(f"cannot write report to {path}: {e}", {"path": str(path)}) from e
    logger.info("wrote %d rows to %s", len(report.rows), path)
    return path


def load_report(path: Path) -> ExperimentReport:
    """Read a JSON report back."""
    path = Path(path)
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise ReportIOError(f"cannot read report {path}: {e}", {"path": str(path)}) from e
    except json.JSONDecodeError as e:
        raise ReportIOError(f"{path} is not a JSON report: {e}", {"path": str(path)}) from e
    if not isinstance(data, dict) or "suite" not in data:
        raise ReportIOError(f"{path} is not a JSON report", {"path": str(path)})
    return ExperimentReport.from_dict(data)


def read_csv_rows(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    """Header and raw string rows of a CSV report."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        rows = list(reader)
        return list(reader.fieldnames or []), rows
