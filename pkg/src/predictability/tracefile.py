"""Reading and writing trace files.

Two formats are understood:

plain
    one decimal value per line; blank lines and ``#`` comments are skipped.
csv
    comma-separated rows; the value column is chosen by header name or
    0-based index. A first row containing any non-numeric field is taken
    as the header.

Written traces use the shortest decimal that round-trips each float, so
reading a written trace reproduces the series exactly.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import List, Optional, Union

from .errors import TraceFormatError
from .series import TimeSeries


def _number(text: str) -> Optional[float]:
    try:
        return float(text)
    except ValueError:
        return None


def _finite(value: float, text: str, path, line: int) -> float:
    if not math.isfinite(value):
        raise TraceFormatError(f"non-finite value {text!r}", path, line)
    return value


def parse_plain(text: str, path=None) -> List[float]:
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        v = _number(line)
        if v is None:
            raise TraceFormatError(f"cannot parse {line!r} as a number", path, lineno)
        values.append(_finite(v, line, path, lineno))
    return values


def parse_csv(text: str, column: Union[str, int, None] = None, path=None) -> List[float]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        rows.append((lineno, next(csv.reader(io.StringIO(line)))))
    if not rows:
        return []

    header = None
    first = rows[0][1]
    if any(_number(cell) is None for cell in first):
        header = [c.strip() for c in first]
        rows = rows[1:]

    if column is None:
        index = 0
    elif isinstance(column, int) or str(column).lstrip("-").isdigit():
        index = int(column)
    else:
        if header is None or column not in header:
            raise TraceFormatError(f"no column named {column!r}", path, 1)
        index = header.index(column)

    values = []
    for lineno, row in rows:
        if index >= len(row) or index < 0:
            raise TraceFormatError(f"row has no column {index}", path, lineno)
        cell = row[index].strip()
        v = _number(cell)
        if v is None:
            raise TraceFormatError(f"cannot parse {cell!r} as a number", path, lineno)
        values.append(_finite(v, cell, path, lineno))
    return values


def detect_format(path) -> str:
    return "csv" if str(path).lower().endswith(".csv") else "plain"


def read_trace(path, fmt: Optional[str] = None, column: Union[str, int, None] = None,
               name: Optional[str] = None) -> TimeSeries:
    """Load a trace file as a :class:`TimeSeries` named after the file stem.

    Raises
    ------
    OSError
        If the file cannot be read.
    TraceFormatError
        On malformed content, with the 1-based line number.
    """
    path = Path(path)
    text = path.read_text()
    fmt = fmt or detect_format(path)
    if fmt == "csv":
        values = parse_csv(text, column, path)
    elif fmt == "plain":
        values = parse_plain(text, path)
    else:
        raise TraceFormatError(f"unknown trace format {fmt!r}", path)
    if len(values) < 2:
        raise TraceFormatError(f"a trace needs at least 2 values, found {len(values)}", path)
    return TimeSeries(values, name=name if name is not None else path.stem)


def format_trace(series: TimeSeries, comment: Optional[str] = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.extend(repr(float(v)) for v in series.values)
    return "\n".join(lines) + "\n"


def write_trace(path, series: TimeSeries, comment: Optional[str] = None) -> None:
    Path(path).write_text(format_trace(series, comment))
