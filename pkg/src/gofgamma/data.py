"""Embedded data sets and the plain-text reader."""
from __future__ import annotations

import math
import re
from pathlib import Path

from .gof import Sample

# waiting times (seconds) between Geiger counter registrations
GEIGER = (
    6.9, 5.9, 7.2, 7.6, 7.5, 7.3, 7.0, 7.1, 6.7, 5.3, 6.7, 7.1, 6.1,
    6.3, 5.4, 6.4, 6.5, 7.3, 5.7, 7.4, 6.3, 7.6, 7.6, 6.7, 6.9,
)

# failure times (hours) of right rear tractor brakes
TRACTOR = (
    56, 83, 104, 116, 244, 305, 429, 452, 453, 503, 552, 614, 661, 673, 683,
    685, 753, 763, 806, 834, 838, 862, 897, 904, 981, 1007, 1008, 1049, 1060,
    1107, 1125, 1141, 1153, 1154, 1193, 1201, 1253, 1313, 1329, 1347, 1454,
    1464, 1490, 1491, 1532, 1549, 1568, 1574, 1586, 1599, 1608, 1723, 1769,
    1795, 1927, 1957, 2005, 2010, 2016, 2022, 2037, 2065, 2096, 2139, 2150,
    2156, 2160, 2190, 2210, 2220, 2248, 2285, 2325, 2337, 2351, 2437, 2454,
    2546, 2565, 2584, 2624, 2675, 2701, 2755, 2877, 2879, 2922, 2986, 3092,
    3160, 3185, 3191, 3439, 3617, 3685, 3756, 3826, 3995, 4007, 4159, 4300,
    4487, 5074, 5579, 5623, 6869, 7739,
)

FIXTURES = {"geiger": GEIGER, "tractor": TRACTOR}


class DatasetError(ValueError):
    """Malformed numeric input; ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


_TOKEN = re.compile(r"[^\s,]+")


def parse_text(text: str) -> Sample:
    """Parse whitespace-, comma- or newline-separated non-negative reals."""
    values = []
    for ln, line in enumerate(text.splitlines(), start=1):
        for m in _TOKEN.finditer(line):
            tok = m.group(0)
            col = m.start() + 1
            try:
                v = float(tok)
            except ValueError:
                raise DatasetError(f"cannot parse {tok!r} as a number", ln, col) from None
            if not math.isfinite(v):
                raise DatasetError(f"non-finite value {tok!r}", ln, col)
            if v < 0:
                raise DatasetError(f"negative value {tok!r}", ln, col)
            values.append(v)
    if not values:
        raise DatasetError("no observations found")
    return Sample(values)


_NUMERIC_TEXT = re.compile(r"^[\s,0-9eE+\-.]*$")


def parse_dataset(source) -> Sample:
    """Read a sample from a file path or from literal numeric text."""
    if isinstance(source, Path):
        if not source.is_file():
            raise DatasetError(f"no such file: {source}")
        return parse_text(source.read_text(encoding="utf-8"))
    if "\n" not in source and Path(source).is_file():
        return parse_text(Path(source).read_text(encoding="utf-8"))
    if _NUMERIC_TEXT.match(source) or "\n" in source:
        return parse_text(source)
    raise DatasetError(f"no such file: {source}")


def fixture(name: str) -> Sample:
    try:
        return Sample(FIXTURES[name])
    except KeyError:
        raise DatasetError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
