"""JSON and CSV rendering of reports."""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Optional

import click
import numpy as np

from .reports import BoundReport

REPORT_COLUMNS = ("name", "status", "relation", "lhs", "rhs", "hypotheses_met", "reasons", "inputs")


def to_jsonable(value: Any) -> Any:
    """Plain Python values only; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if hasattr(value, 'to_dict'):
        return to_jsonable(value.to_dict())
    return value


def render_json(document: Any) -> str:
    """Floats are written with repr, so they read back bit-exactly."""
    return json.dumps(to_jsonable(document), indent=2)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (dict, list)):
        return json.dumps(to_jsonable(value), sort_keys=True)
    return str(value)


def render_reports_csv(reports: Iterable[BoundReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(REPORT_COLUMNS)
    for report in reports:
        row = report.to_dict()
        writer.writerow([_cell(row.get(column)) for column in REPORT_COLUMNS])
    return buffer.getvalue()


def render_rows_csv(header: List[str], rows: Iterable[Iterable[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def write_output(content: str, path: Optional[Path]) -> None:
    """Write to path, or to stdout when path is None."""
    if path is None:
        click.echo(content, nl=not content.endswith('\n'))
        return
    try:
        Path(path).write_text(content, encoding='utf-8')
    except OSError as e:
        raise OSError(f"Failed to write output file '{path}': {e}")
