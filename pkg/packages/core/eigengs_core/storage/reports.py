"""CSV emission and parsing for fit reports and batch tables."""

import csv
import logging
from pathlib import Path
from typing import Iterable, Sequence

from eigengs_core.models import REPORT_COLUMNS, FitReport

logger = logging.getLogger(__name__)


def format_value(value) -> str:
    """Floats as their shortest round-tripping repr, everything else as str."""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a header row and data rows as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def write_report(report: FitReport, path: str | Path) -> Path:
    """Write a fit report with the fixed column order."""
    rows = ((r.iteration, r.loss, r.psnr_db, r.ssim, r.seconds) for r in report)
    path = write_rows(path, REPORT_COLUMNS, rows)
    logger.debug(f"Wrote {len(report)} report rows to {path}")
    return path


def read_report(path: str | Path) -> FitReport:
    """
    Parse a fit report CSV.

    Raises:
        ValueError: Header does not match the report schema, or rows are out of order
    """
    path = Path(path)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != REPORT_COLUMNS:
            raise ValueError(f"{path} is not a fit report (header {header})")

        report = FitReport()
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                report.record(int(row[0]), float(row[1]), float(row[2]), float(row[3]), float(row[4]))
            except (IndexError, ValueError) as e:
                raise ValueError(f"{path}:{line}: {e}") from e
    return report
