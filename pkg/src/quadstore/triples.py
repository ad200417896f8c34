"""Triple records and the shared tab-separated triple file format.

A triple is one (row, column, value) string entry, the unit of data for
the whole system. The on-disk format is UTF-8, one triple per line,
three tab-separated fields. Literal tab, newline, and backslash inside
a field are escaped as ``\\t``, ``\\n``, ``\\\\`` so the raw separator
bytes never appear inside a field.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, NamedTuple


class Triple(NamedTuple):
    row: str
    col: str
    value: str


class TripleFormatError(ValueError):
    """A line of triple-format input could not be decoded."""


def escape_field(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def unescape_field(s: str) -> str:
    if "\\" not in s:
        return s
    out = []
    i = 0
    n = len(s)
    while i < n:
        c = s[i]
        if c == "\\" and i + 1 < n:
            nxt = s[i + 1]
            if nxt == "t":
                out.append("\t")
            elif nxt == "n":
                out.append("\n")
            elif nxt == "\\":
                out.append("\\")
            else:
                # unknown escape: keep the escaped character as-is
                out.append(nxt)
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def format_number(x: float) -> str:
    """Shortest decimal form that parses back to the same float.

    Integral values drop the trailing ``.0`` (``2.0`` -> ``"2"``);
    ``-0.0`` keeps its sign so the round trip is exact.
    """
    if math.isfinite(x) and x == int(x) and abs(x) < 2**53:
        if x == 0.0 and math.copysign(1.0, x) < 0:
            return "-0.0"
        return str(int(x))
    return repr(x)


def format_value(v: str | float | int) -> str:
    if isinstance(v, str):
        return v
    return format_number(float(v))


def format_line(row: str, col: str, value: str | float | int) -> str:
    return "\t".join(
        (escape_field(row), escape_field(col), escape_field(format_value(value)))
    )


def parse_line(line: str) -> Triple:
    parts = line.split("\t")
    if len(parts) != 3:
        raise TripleFormatError(
            f"expected 3 tab-separated fields, got {len(parts)}: {line!r}"
        )
    return Triple(
        unescape_field(parts[0]), unescape_field(parts[1]), unescape_field(parts[2])
    )


def write_triples(path: str | Path, triples: Iterable[Triple]) -> None:
    # newline='' so a raw \r inside a field survives untouched
    with open(path, "w", encoding="utf-8", newline="") as f:
        for t in triples:
            f.write(format_line(t.row, t.col, t.value))
            f.write("\n")


def read_triples(path: str | Path) -> list[Triple]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        data = f.read()
    return [parse_line(line) for line in data.split("\n") if line]
