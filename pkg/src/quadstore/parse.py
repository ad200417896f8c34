"""Source parsing: delimited or JSON-lines input to exploded records.

A RecordSpec names the row-key field, the fields to explode into
field|value pairs, and optionally a free-text field whose ASCII-
whitespace tokens become token pairs while the raw value is kept for
the text table. Parse errors never abort a file: each bad line comes
back as a BadRecord.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

from .schema import ExplodedRecord, flip_key
from .triples import format_number

log = logging.getLogger(__name__)

# ASCII whitespace only; str.split() would also break on U+00A0 etc.
_TOKEN_SPLIT = re.compile(r"[ \t\r\n\x0b\x0c]+")

DEFAULT_NULL = "null"
DEFAULT_TOKEN_FIELD = "word"


class ParseError(Exception):
    pass


class HeaderError(ParseError):
    """The header line is unusable (duplicate or missing columns)."""


class ConfigError(ParseError):
    """A record-spec config file is malformed."""


class ExplodeError(ParseError):
    """A record cannot be exploded (unusable row key)."""


class RawRecord(NamedTuple):
    line_no: int
    fields: dict[str, str]


class BadRecord(NamedTuple):
    line_no: int
    line: str
    reason: str


@dataclass(frozen=True)
class RecordSpec:
    """How to turn a source record into an exploded one.

    flip=None means the caller decides (the stored schema's setting
    wins); an explicit True/False in a config file must then agree
    with it.
    """

    row_key: str
    explode_fields: tuple[str, ...]
    text_field: str | None = None
    token_field: str = DEFAULT_TOKEN_FIELD
    null_literal: str = DEFAULT_NULL
    delimiter: str = "\t"
    flip: bool | None = None

    def __post_init__(self):
        if not self.row_key:
            raise ConfigError("row key field must be named")
        if self.row_key in self.explode_fields:
            raise ConfigError(f"row key {self.row_key!r} also listed in explode")


def tokenize(text: str) -> list[str]:
    """Split on runs of ASCII whitespace, dropping empties. Tokens keep
    their punctuation and case."""
    return [t for t in _TOKEN_SPLIT.split(text) if t]


def make_pair(field_name: str, value: str) -> str:
    """Join a field and value as 'field|value', escaping '|' and '\\'
    so the pair splits back unambiguously."""
    f = field_name.replace("\\", "\\\\").replace("|", "\\|")
    v = value.replace("\\", "\\\\").replace("|", "\\|")
    return f"{f}|{v}"


def split_pair(pair: str) -> tuple[str, str]:
    """Inverse of make_pair: split at the first unescaped '|'."""
    head: list[str] = []
    i = 0
    while i < len(pair):
        ch = pair[i]
        if ch == "\\" and i + 1 < len(pair):
            head.append(pair[i + 1])
            i += 2
            continue
        if ch == "|":
            tail: list[str] = []
            j = i + 1
            while j < len(pair):
                if pair[j] == "\\" and j + 1 < len(pair):
                    tail.append(pair[j + 1])
                    j += 2
                else:
                    tail.append(pair[j])
                    j += 1
            return "".join(head), "".join(tail)
        head.append(ch)
        i += 1
    raise ParseError(f"no separator in pair {pair!r}")


def parse_delimited(
    lines: Iterable[str], delimiter: str = "\t"
) -> Iterator[RawRecord | BadRecord]:
    """Parse header-first delimited text. Rows with the wrong field
    count come back as BadRecords; blank lines are skipped. Fields are
    taken verbatim (the format has no quoting or escapes), so values
    must not contain the delimiter."""
    header: list[str] | None = None
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n") if raw.endswith("\n") or raw.endswith("\r") else raw
        if not line:
            continue
        parts = line.split(delimiter)
        if header is None:
            if len(set(parts)) != len(parts):
                raise HeaderError(f"duplicate column names in header: {parts}")
            header = parts
            continue
        if len(parts) != len(header):
            yield BadRecord(
                line_no, line, f"expected {len(header)} fields, got {len(parts)}"
            )
            continue
        yield RawRecord(line_no, dict(zip(header, parts)))


def parse_json_lines(
    lines: Iterable[str], null_literal: str = DEFAULT_NULL
) -> Iterator[RawRecord | BadRecord]:
    """Parse one JSON object per line. Nested objects flatten one level
    with dotted names; null becomes the null literal; numbers and bools
    are rendered the way the store renders them; deeper structure is
    kept as compact JSON."""
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            yield BadRecord(line_no, line, f"bad JSON: {e.msg}")
            continue
        if not isinstance(obj, dict):
            yield BadRecord(line_no, line, "top level is not an object")
            continue
        fields: dict[str, str] = {}
        for k, v in obj.items():
            if isinstance(v, dict):
                for kk, vv in v.items():
                    fields[f"{k}.{kk}"] = _json_scalar(vv, null_literal)
            else:
                fields[k] = _json_scalar(v, null_literal)
        yield RawRecord(line_no, fields)


def _json_scalar(v, null_literal: str) -> str:
    if v is None:
        return null_literal
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_number(v)
    return json.dumps(v, ensure_ascii=False, separators=(",", ":"))


def explode(record: RawRecord, spec: RecordSpec, flip: bool | None = None) -> ExplodedRecord:
    """Turn a parsed record into an ExplodedRecord.

    Absent, empty, or null-literal explode fields still emit a pair,
    valued with the null literal, so missing data stays queryable. An
    absent or empty text field stores the null literal; the stored text
    is then tokenized as-is, so a null text yields one null token pair.
    The row key is flipped when requested.
    """
    do_flip = spec.flip if flip is None else flip
    row = record.fields.get(spec.row_key, "")
    if not row or row == spec.null_literal:
        raise ExplodeError(
            f"line {record.line_no}: row key {spec.row_key!r} is missing or null"
        )
    if do_flip:
        row = flip_key(row)
    pairs: set[str] = set()
    for name in spec.explode_fields:
        value = record.fields.get(name, "")
        if not value or value == spec.null_literal:
            value = spec.null_literal
        pairs.add(make_pair(name, value))
    text = None
    if spec.text_field is not None:
        raw = record.fields.get(spec.text_field, "")
        text = raw if raw else spec.null_literal
        for token in tokenize(text):
            pairs.add(make_pair(spec.token_field, token))
    return ExplodedRecord(row, tuple(sorted(pairs)), text)


def to_delimited(header: list[str], records: Iterable[dict[str, str]], delimiter: str = "\t") -> str:
    """Serialize records for the delimited parser (testing and fixture
    helper). Raises if any value contains the delimiter or a newline,
    since the format cannot escape them."""
    lines = [delimiter.join(header)]
    for rec in records:
        row = []
        for name in header:
            v = rec.get(name, "")
            if delimiter in v or "\n" in v or "\r" in v:
                raise ParseError(f"value {v!r} cannot be represented")
            row.append(v)
        lines.append(delimiter.join(row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Config files: "key = value" lines, '#' comments. Keys: rowkey, explode,
# text, tokens, null, delimiter, flip.
# ---------------------------------------------------------------------------

_DELIM_NAMES = {"\\t": "\t", "tab": "\t", ",": ",", "comma": ","}


def load_record_spec(path: str) -> RecordSpec:
    with open(path, "r", encoding="utf-8") as f:
        return parse_record_spec(f.read(), source=path)


def parse_record_spec(text: str, source: str = "<config>") -> RecordSpec:
    seen: dict[str, str] = {}
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if " = " not in line:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value'")
        key, value = line.split(" = ", 1)
        key = key.strip()
        if key in seen:
            raise ConfigError(f"{source}:{line_no}: duplicate key {key!r}")
        seen[key] = value
    known = {"rowkey", "explode", "text", "tokens", "null", "delimiter", "flip"}
    unknown = set(seen) - known
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")
    if "rowkey" not in seen:
        raise ConfigError(f"{source}: missing required key 'rowkey'")
    explode_fields = tuple(
        f.strip() for f in seen.get("explode", "").split(",") if f.strip()
    )
    flip: bool | None = None
    if "flip" in seen:
        v = seen["flip"].strip().lower()
        if v not in ("true", "false"):
            raise ConfigError(f"{source}: flip must be true or false, not {v!r}")
        flip = v == "true"
    delim = seen.get("delimiter", "\t")
    delim = _DELIM_NAMES.get(delim, delim)
    return RecordSpec(
        row_key=seen["rowkey"],
        explode_fields=explode_fields,
        text_field=seen.get("text") or None,
        token_field=seen.get("tokens", DEFAULT_TOKEN_FIELD),
        null_literal=seen.get("null", DEFAULT_NULL),
        delimiter=delim,
        flip=flip,
    )
