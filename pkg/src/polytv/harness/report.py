"""CSV and JSON report writers.

Both formats render floats with ``repr`` so that a value read back from either
file is the same double. Non-finite floats are written as the strings
``"inf"``, ``"-inf"`` and ``"nan"`` in both formats, missing values as an empty
CSV cell or JSON ``null``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys

SPEC_VERSION = 1
FORMATS = ("csv", "json")


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(rows: list[dict], columns: list[str], fmt: str, notes: list[str] | None = None) -> str:
    if fmt == "json":
        payload = {"spec_version": SPEC_VERSION}
        if notes:
            payload["notes"] = list(notes)
        payload["rows"] = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(payload, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_csv_value(r.get(c)) for c in columns])
    return buf.getvalue()


def write(text: str, path: str | None) -> None:
    """Write to ``path``, or to stdout when ``path`` is None or ``-``."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def parse_csv(text: str) -> list[dict]:
    """Inverse of :func:`render` for CSV (strings only; callers convert)."""
    return list(csv.DictReader(io.StringIO(text)))
