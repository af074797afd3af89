# src/galgeo/cli/output.py
import json
import math
import sys
from typing import Any, Dict, List, Optional, TextIO

import numpy as np
import pandas as pd

from src.galgeo.config import settings


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _summary_text(summary: Dict[str, Any], float_format: str) -> str:
    parts = []
    for key, value in summary.items():
        if isinstance(value, (float, np.floating)):
            value = float_format % value
        parts.append(f"{key}={value}")
    return "# summary: " + ",".join(parts)


def write_table(
    rows: List[Dict[str, Any]],
    fmt: str = "csv",
    stream: Optional[TextIO] = None,
    summary: Optional[Dict[str, Any]] = None,
    float_format: Optional[str] = None,
) -> None:
    """Write rows as CSV (header + rows) or as a JSON array.

    A summary becomes a trailing "# summary: ..." comment line in CSV and a
    final {"summary": {...}} object in JSON.
    """
    stream = sys.stdout if stream is None else stream
    float_format = settings.float_format if float_format is None else float_format
    if fmt == "json":
        payload = [_jsonable(row) for row in rows]
        if summary is not None:
            payload.append({"summary": _jsonable(summary)})
        stream.write(json.dumps(payload) + "\n")
        return
    if fmt != "csv":
        raise ValueError(f"unknown output format {fmt!r}")
    frame = pd.DataFrame(rows)
    frame.to_csv(stream, index=False, float_format=float_format, lineterminator="\n")
    if summary is not None:
        stream.write(_summary_text(summary, float_format) + "\n")
