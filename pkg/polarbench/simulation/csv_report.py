"""CSV rendering of trial summaries."""

import csv
import io
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, TextIO

from .engine import TrialSummary

CSV_COLUMNS = [
    "scheme",
    "n",
    "rate",
    "rule",
    "channel_kind",
    "channel_param",
    "decoder",
    "trials",
    "failures",
    "p_hat",
    "ci_low",
    "ci_high",
    "mean_distortion",
    "seed",
]


def format_value(value: Any) -> str:
    """Floats with 6 significant digits, missing values as an empty field."""
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def summary_row(summary: TrialSummary) -> Dict[str, str]:
    return {column: format_value(getattr(summary, column)) for column in CSV_COLUMNS}


def write_rows(stream: TextIO, summaries: Iterable[TrialSummary], header: bool = True) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    if header:
        writer.writeheader()
    for summary in summaries:
        writer.writerow(summary_row(summary))


def summaries_to_csv(summaries: Iterable[TrialSummary]) -> str:
    buffer = io.StringIO()
    write_rows(buffer, summaries)
    return buffer.getvalue()


def append_csv(path: str, summaries: List[TrialSummary]) -> None:
    """Append rows to ``path``, writing the header first when the file is new or empty."""
    target = Path(path)
    needs_header = not target.exists() or target.stat().st_size == 0
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "a", newline="") as f:
        write_rows(f, summaries, header=needs_header)


def read_csv(path: str, scheme: Optional[str] = None) -> List[Dict[str, str]]:
    """Rows of a results file, optionally restricted to one scheme."""
    with open(path, "r", newline="") as f:
        rows = list(csv.DictReader(f))
    return [row for row in rows if scheme is None or row["scheme"] == scheme]
