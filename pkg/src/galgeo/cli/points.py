# src/galgeo/cli/points.py
"""Point specifications on the command line.

    --at / --init   "t=0,x=[2],y=[1]"  or  "t=0,x1=2,y1=1"
    --grid          "t=-1:1:3,x1=0:2:5,y1=1"   (lo:hi:count or a single value)

Unspecified coordinates are 0. Grid points are the Cartesian product in
the order t, x1..xn, y1..yn with t varying slowest.
"""
import itertools
import re
from typing import Dict, List, Sequence

import numpy as np

from src.galgeo.base import ArgumentSpecError
from src.galgeo.symbolic.expr import ChartPoint

_ITEM_RE = re.compile(r"\s*([A-Za-z]\w*)\s*=\s*(\[[^\]]*\]|[^,\[\]]*?)\s*(,|$)")
_COMPONENT_RE = re.compile(r"^([xy])(\d+)$")


def coordinate_names(n: int) -> List[str]:
    return ["t"] + [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)]


def _items(spec: str) -> Dict[str, str]:
    items: Dict[str, str] = {}
    pos = 0
    spec = spec.strip()
    while pos < len(spec):
        match = _ITEM_RE.match(spec, pos)
        if match is None or match.end() == pos:
            raise ArgumentSpecError(f"cannot parse {spec!r} near position {pos}")
        key, value = match.group(1), match.group(2)
        if key in items:
            raise ArgumentSpecError(f"coordinate {key!r} given twice in {spec!r}")
        items[key] = value
        pos = match.end()
    return items


def _number(text: str, key: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ArgumentSpecError(f"invalid number {text!r} for {key}") from None
    if not np.isfinite(value):
        raise ArgumentSpecError(f"non-finite value for {key}")
    return value


def _flat_index(key: str, n: int) -> int:
    names = coordinate_names(n)
    if key not in names:
        match = _COMPONENT_RE.match(key)
        if match and int(match.group(2)) >= 1:
            raise ArgumentSpecError(f"coordinate {key!r} out of range for n={n}")
        raise ArgumentSpecError(f"unknown coordinate {key!r}")
    return names.index(key)


def parse_point(spec: str, n: int) -> ChartPoint:
    values = np.zeros(2 * n + 1)
    for key, text in _items(spec).items():
        if key in ("x", "y"):
            if not (text.startswith("[") and text.endswith("]")):
                raise ArgumentSpecError(f"{key} must be a bracketed list, got {text!r}")
            inner = text[1:-1].strip()
            entries = [_number(part, key) for part in inner.split(",")] if inner else []
            if len(entries) != n:
                raise ArgumentSpecError(f"{key} needs {n} entries, got {len(entries)}")
            offset = 1 if key == "x" else n + 1
            values[offset:offset + n] = entries
        else:
            values[_flat_index(key, n)] = _number(text, key)
    return ChartPoint.from_array(values, n)


def parse_points(specs: Sequence[str], n: int) -> List[ChartPoint]:
    return [parse_point(spec, n) for spec in specs]


def parse_grid(spec: str, n: int) -> List[ChartPoint]:
    axes = [np.zeros(1) for _ in range(2 * n + 1)]
    for key, text in _items(spec).items():
        index = _flat_index(key, n)
        parts = text.split(":")
        if len(parts) == 1:
            axes[index] = np.array([_number(parts[0], key)])
        elif len(parts) == 3:
            lo, hi = _number(parts[0], key), _number(parts[1], key)
            try:
                count = int(parts[2])
            except ValueError:
                raise ArgumentSpecError(f"invalid count {parts[2]!r} for {key}") from None
            if count < 1:
                raise ArgumentSpecError(f"count for {key} must be positive")
            axes[index] = np.linspace(lo, hi, count)
        else:
            raise ArgumentSpecError(f"grid item for {key} must be lo:hi:count or a value, got {text!r}")
    return [ChartPoint.from_array(values, n) for values in itertools.product(*axes)]
