"""CSV and SVG output with atomic writes."""
from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .indicator import SaStCurve
from .svg import line_chart_svg

__all__ = [
    "format_value",
    "csv_text",
    "atomic_write_text",
    "write_csv",
    "curve_csv_text",
    "curves_svg_text",
]


def format_value(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def csv_text(header, rows, delimiter=","):
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows):
    return atomic_write_text(path, csv_text(header, rows))


def curve_csv_text(curve: SaStCurve):
    return csv_text(["T", "S"], zip(curve.thresholds, curve.accuracies))


def curves_svg_text(curves, title=""):
    """Overlay named :class:`SaStCurve` objects in one chart."""
    series = {name: (c.thresholds, c.accuracies) for name, c in curves.items()}
    return line_chart_svg(series, "Sensory threshold T", "SA", title)
