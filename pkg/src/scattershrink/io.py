"""Data files and atomic CSV output.

A data file holds one complex observation per row as ``2p`` comma-separated
real numbers, real and imaginary parts interleaved. An optional first-row
header is skipped when it does not parse as numbers.
"""

import csv
import io
import math
import os
import tempfile

import numpy as np

from .errors import ParseError

__all__ = ["read_samples", "parse_samples", "format_matrix", "write_atomic", "write_csv", "format_value"]


def _parse_row(fields, line):
    try:
        return [float(f) for f in fields]
    except ValueError:
        raise ParseError(f"non-numeric field in {fields!r}", line) from None


def parse_samples(text):
    rows = []
    width = None
    for line, fields in enumerate(csv.reader(io.StringIO(text)), start=1):
        fields = [f.strip() for f in fields]
        if not fields or all(f == "" for f in fields):
            continue
        if line == 1 and not rows:
            try:
                [float(f) for f in fields]
            except ValueError:
                continue  # header
        if len(fields) % 2:
            raise ParseError(f"odd number of fields ({len(fields)}); expected re,im pairs", line)
        values = _parse_row(fields, line)
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(f"row has {len(values)} fields, expected {width}", line)
        rows.append(values)
    if not rows:
        raise ParseError("no data rows")
    arr = np.asarray(rows)
    return arr[:, 0::2] + 1j * arr[:, 1::2]


def read_samples(path):
    """Load an ``(n, p)`` complex array from a data file."""
    with open(path, newline="") as fh:
        return parse_samples(fh.read())


def format_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def format_matrix(S):
    """CSV text of a complex matrix with interleaved real and imaginary parts."""
    lines = []
    for row in np.asarray(S):
        lines.append(",".join(f"{format_value(v.real)},{format_value(v.imag)}" for v in row))
    return "\n".join(lines) + "\n"


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, rows, columns):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    write_atomic(path, buf.getvalue())
