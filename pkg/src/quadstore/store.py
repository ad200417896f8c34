"""Embedded sorted triple store with range-partitioned tablets.

Each table keeps string triples (row, col, value) sorted by (row, col).
A table is split into tablets at row keys: tablet i holds the rows r with
splits[i-1] < r <= splits[i] (first tablet unbounded below, last unbounded
above). Writers serialize per tablet, so ingest threads working disjoint
key ranges do not contend. Combining happens at insert time: a table
created with the numericSum combiner folds a duplicate (row, col) write
into the stored value instead of replacing it.

Consistency model: scans snapshot one tablet at a time under its write
lock. A scan therefore sees each tablet at a single instant, but not the
whole table; a mutation batch is not atomic across tablets.
"""

from __future__ import annotations

import logging
import os
import threading
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

from .triples import Triple, format_number, read_triples, write_triples

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest"
STORE_FORMAT = "quadstore-store-v1"


class StoreError(Exception):
    """Base class for triple-store errors."""


class TableExistsError(StoreError):
    def __init__(self, name: str):
        super().__init__(f"table {name!r} already exists")
        self.name = name


class UnknownTableError(StoreError):
    def __init__(self, name: str):
        super().__init__(f"no such table {name!r}")
        self.name = name


class CombinerError(StoreError):
    """The insert-time combiner could not fold two values."""

    def __init__(self, row: str, col: str, old: str, new: str):
        super().__init__(
            f"numericSum at ({row!r}, {col!r}): "
            f"cannot combine {old!r} with {new!r}"
        )
        self.row = row
        self.col = col


class ManifestError(StoreError):
    """A persisted store directory is malformed."""


class Mutation(NamedTuple):
    """One write: sets or combines the value at (row, col)."""

    row: str
    col: str
    value: str


class CombinerKind(Enum):
    LAST_WINS = "lastWins"
    NUMERIC_SUM = "numericSum"


def _parse_numeric(s: str):
    """Parse a stored value as int when integer-formed, else float.
    Raises ValueError for non-numeric text."""
    try:
        return int(s)
    except ValueError:
        return float(s)


def numeric_sum(old: str, new: str) -> str:
    """Fold two numeric strings. Integer-formed operands stay exact
    (arbitrary precision, serialized without a decimal point); anything
    else goes through float and comes back in shortest round-trip form."""
    a = _parse_numeric(old)
    b = _parse_numeric(new)
    total = a + b
    if isinstance(total, int):
        return str(total)
    return format_number(total)


@dataclass
class ScanStats:
    """Filled in by scan() when passed as the stats argument."""

    tablets_visited: int = 0
    entries_scanned: int = 0
    entries_returned: int = 0


@dataclass(frozen=True)
class TabletStats:
    lo: str | None  # exclusive lower row bound, None = unbounded
    hi: str | None  # inclusive upper row bound, None = unbounded
    entries: int
    writes: int


@dataclass
class AppliedStats:
    applied: int = 0  # mutations processed
    created: int = 0  # fresh (row, col) keys inserted
    combined: int = 0  # writes folded into an existing entry

    def merge(self, other: "AppliedStats") -> None:
        self.applied += other.applied
        self.created += other.created
        self.combined += other.combined


def key_successor(key: str) -> str | None:
    """Smallest string greater than every string prefixed by `key`,
    or None when no such bound exists (all code points at the max)."""
    for i in range(len(key) - 1, -1, -1):
        c = ord(key[i])
        if c < 0x10FFFF:
            return key[:i] + chr(c + 1)
    return None


class _Tablet:
    """One contiguous row range of a table. `keys` is kept sorted; values
    live beside it in a dict. All access happens under `lock`."""

    __slots__ = ("lo", "hi", "keys", "values", "writes", "lock", "retired")

    def __init__(self, lo: str | None, hi: str | None):
        self.lo = lo
        self.hi = hi
        self.keys: list[tuple[str, str]] = []
        self.values: dict[tuple[str, str], str] = {}
        self.writes = 0
        self.lock = threading.Lock()
        self.retired = False

    def slice_bounds(
        self, lo: tuple[str, str] | None, hi: tuple[str, str] | None
    ) -> tuple[int, int]:
        """Indices of the half-open (row, col) interval [lo, hi) in keys.
        Caller holds the lock."""
        i = 0 if lo is None else bisect_left(self.keys, lo)
        j = len(self.keys) if hi is None else bisect_left(self.keys, hi)
        return i, j


class Table:
    """Handle to one table. Obtained from TripleStore; do not construct
    directly."""

    def __init__(self, name: str, combiner: CombinerKind):
        self.name = name
        self.combiner = combiner
        # replaced wholesale under _meta_lock when splits change; readers
        # take a plain reference, which is atomic
        self._tablets: list[_Tablet] = [_Tablet(None, None)]
        self._meta_lock = threading.Lock()

    # -- routing -------------------------------------------------------------

    def _route(self, tablets: list[_Tablet], row: str) -> int:
        # first tablet whose inclusive upper bound >= row; the last tablet
        # is unbounded and catches everything else
        uppers = [t.hi for t in tablets[:-1]]
        return bisect_left(uppers, row)

    @property
    def split_keys(self) -> list[str]:
        tablets = self._tablets
        return [t.hi for t in tablets[:-1]]  # type: ignore[misc]

    # -- writes ---------------------------------------------------------------

    def apply(self, mutations: Iterable[Mutation]) -> AppliedStats:
        """Apply a batch of mutations. Each mutation is routed to the
        tablet owning its row; the batch locks each target tablet once.
        Not atomic across tablets: a CombinerError leaves earlier
        mutations applied."""
        stats = AppliedStats()
        pending = list(mutations)
        while pending:
            tablets = self._tablets
            uppers = [t.hi for t in tablets[:-1]]
            groups: dict[int, list[Mutation]] = {}
            for m in pending:
                groups.setdefault(bisect_left(uppers, m.row), []).append(m)
            pending = []
            for idx, group in groups.items():
                tablet = tablets[idx]
                with tablet.lock:
                    if tablet.retired:
                        # split landed between routing and locking; re-route
                        pending.extend(group)
                        continue
                    self._apply_to_tablet(tablet, group, stats)
        return stats

    def _apply_to_tablet(
        self, tablet: _Tablet, group: list[Mutation], stats: AppliedStats
    ) -> None:
        for m in group:
            key = (m.row, m.col)
            if key in tablet.values:
                if self.combiner is CombinerKind.NUMERIC_SUM:
                    old = tablet.values[key]
                    try:
                        tablet.values[key] = numeric_sum(old, m.value)
                    except ValueError:
                        raise CombinerError(m.row, m.col, old, m.value) from None
                else:
                    tablet.values[key] = m.value
                stats.combined += 1
            else:
                if self.combiner is CombinerKind.NUMERIC_SUM:
                    # reject unparseable values up front so the table
                    # never holds a value the combiner would choke on
                    try:
                        _parse_numeric(m.value)
                    except ValueError:
                        raise CombinerError(m.row, m.col, m.value, m.value) from None
                insort(tablet.keys, key)
                tablet.values[key] = m.value
                stats.created += 1
            tablet.writes += 1
            stats.applied += 1

    # -- splits ---------------------------------------------------------------

    def add_splits(self, keys: Iterable[str]) -> None:
        """Introduce split points. Existing entries are redistributed; the
        piece keeping a tablet's original upper bound inherits its write
        count, so the per-table write total is preserved."""
        for split in sorted(set(keys)):
            with self._meta_lock:
                tablets = self._tablets
                idx = self._route(tablets, split)
                old = tablets[idx]
                if old.hi is not None and old.hi == split:
                    continue  # already a boundary
                with old.lock:
                    low = _Tablet(old.lo, split)
                    high = _Tablet(split, old.hi)
                    # rows <= split go low; first (row, col) beyond is the cut
                    cut = bisect_left(old.keys, (split + "\x00", ""))
                    low.keys = old.keys[:cut]
                    high.keys = old.keys[cut:]
                    low.values = {k: old.values[k] for k in low.keys}
                    high.values = {k: old.values[k] for k in high.keys}
                    high.writes = old.writes
                    old.retired = True
                    self._tablets = tablets[:idx] + [low, high] + tablets[idx + 1 :]

    # -- reads ----------------------------------------------------------------

    def scan(
        self,
        row: str | None = None,
        lo: str | None = None,
        hi: str | None = None,
        prefix: str | None = None,
        col: str | None = None,
        col_prefix: str | None = None,
        stats: ScanStats | None = None,
    ) -> list[Triple]:
        """Read entries in (row, col) order.

        Row selection: `row` (exact) or `prefix` or the inclusive range
        `lo`..`hi`; omit all three for a full scan. Column selection:
        `col` (exact) or `col_prefix`. When the row is exact the column
        filter narrows the key slice itself, so point probes touch at
        most one entry; otherwise columns filter the row slice.
        """
        if sum(x is not None for x in (row, prefix)) > 1 or (
            row is not None and (lo is not None or hi is not None)
        ):
            raise ValueError("pass only one of row=, prefix=, lo=/hi=")
        if prefix is not None and (lo is not None or hi is not None):
            raise ValueError("pass only one of row=, prefix=, lo=/hi=")
        if col is not None and col_prefix is not None:
            raise ValueError("pass only one of col=, col_prefix=")

        # row interval [row_lo, row_hi) over row keys
        if row is not None:
            row_lo, row_hi = row, row + "\x00"
        elif prefix is not None:
            row_lo, row_hi = prefix, key_successor(prefix)
        else:
            row_lo = lo
            row_hi = None if hi is None else hi + "\x00"

        # (row, col) tuple interval; exact row lets the column filter
        # tighten the bounds directly
        if row is not None and col is not None:
            lo_key = (row, col)
            hi_key = (row, col + "\x00")
        elif row is not None and col_prefix is not None:
            succ = key_successor(col_prefix)
            lo_key = (row, col_prefix)
            hi_key = (row, succ) if succ is not None else (row_hi, "")
        else:
            lo_key = None if row_lo is None else (row_lo, "")
            hi_key = None if row_hi is None else (row_hi, "")

        out: list[Triple] = []
        tablets = self._tablets
        for tablet in tablets:
            with tablet.lock:
                i, j = tablet.slice_bounds(lo_key, hi_key)
                if i == j:
                    continue
                chunk = tablet.keys[i:j]
                vals = [tablet.values[k] for k in chunk]
            if stats is not None:
                stats.tablets_visited += 1
                stats.entries_scanned += len(chunk)
            for (r, c), v in zip(chunk, vals):
                if col is not None and c != col:
                    continue
                if col_prefix is not None and not c.startswith(col_prefix):
                    continue
                out.append(Triple(r, c, v))
        if stats is not None:
            stats.entries_returned += len(out)
        return out

    def tablet_stats(self) -> list[TabletStats]:
        out = []
        for t in self._tablets:
            with t.lock:
                out.append(TabletStats(t.lo, t.hi, len(t.keys), t.writes))
        return out

    @property
    def entry_count(self) -> int:
        return sum(s.entries for s in self.tablet_stats())


class TripleStore:
    """A named collection of tables, created in memory and persisted to a
    directory with snapshot()/restore()."""

    def __init__(self):
        self._tables: dict[str, Table] = {}
        self._lock = threading.Lock()

    def create_table(
        self, name: str, combiner: CombinerKind = CombinerKind.LAST_WINS
    ) -> Table:
        with self._lock:
            if name in self._tables:
                raise TableExistsError(name)
            table = Table(name, combiner)
            self._tables[name] = table
            return table

    def table(self, name: str) -> Table:
        with self._lock:
            try:
                return self._tables[name]
            except KeyError:
                raise UnknownTableError(name) from None

    def has_table(self, name: str) -> bool:
        with self._lock:
            return name in self._tables

    def table_names(self) -> list[str]:
        with self._lock:
            return sorted(self._tables)

    # -- persistence -----------------------------------------------------------

    def snapshot(self, root: str) -> None:
        """Write every table under `root`: a store manifest plus one
        directory per table holding its manifest and one file per tablet.
        Restoring the snapshot reproduces tables, combiners, splits, write
        counts, and entries exactly."""
        os.makedirs(root, exist_ok=True)
        names = self.table_names()
        _write_manifest(
            os.path.join(root, MANIFEST_NAME),
            [("format", STORE_FORMAT), ("tables", str(len(names)))],
        )
        for i, name in enumerate(names):
            table = self.table(name)
            tdir = os.path.join(root, f"table-{i}")
            os.makedirs(tdir, exist_ok=True)
            stats = table.tablet_stats()
            splits = table.split_keys
            lines = [
                ("name", _escape_field_text(name)),
                ("combiner", table.combiner.value),
                ("splits", _join_keys(splits)),
                ("writes", ",".join(str(s.writes) for s in stats)),
                ("tablets", str(len(stats))),
            ]
            _write_manifest(os.path.join(tdir, MANIFEST_NAME), lines)
            for j, tablet in enumerate(table._tablets):
                with tablet.lock:
                    triples = [
                        Triple(r, c, tablet.values[(r, c)]) for r, c in tablet.keys
                    ]
                write_triples(os.path.join(tdir, f"tablet-{j}.tsv"), triples)

    @classmethod
    def restore(cls, root: str) -> "TripleStore":
        meta = _read_manifest(os.path.join(root, MANIFEST_NAME))
        if meta.get("format") != STORE_FORMAT:
            raise ManifestError(f"unrecognized store format in {root!r}")
        store = cls()
        count = int(meta.get("tables", "0"))
        for i in range(count):
            tdir = os.path.join(root, f"table-{i}")
            tmeta = _read_manifest(os.path.join(tdir, MANIFEST_NAME))
            name = _unescape_field_text(tmeta["name"])
            combiner = CombinerKind(tmeta["combiner"])
            table = store.create_table(name, combiner)
            splits = _split_keys(tmeta["splits"])
            if splits:
                table.add_splits(splits)
            writes = tmeta.get("writes", "")
            write_counts = [int(w) for w in writes.split(",")] if writes else []
            ntablets = int(tmeta["tablets"])
            if ntablets != len(table._tablets):
                raise ManifestError(
                    f"table {name!r}: manifest says {ntablets} tablets, "
                    f"splits imply {len(table._tablets)}"
                )
            for j, tablet in enumerate(table._tablets):
                path = os.path.join(tdir, f"tablet-{j}.tsv")
                for t in read_triples(path):
                    key = (t.row, t.col)
                    insort(tablet.keys, key)
                    tablet.values[key] = t.value
                if j < len(write_counts):
                    tablet.writes = write_counts[j]
        return store


# ---------------------------------------------------------------------------
# Manifest helpers: one "key = value" line per entry, keys never repeat.
# ---------------------------------------------------------------------------


def _write_manifest(path: str, pairs: list[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        for k, v in pairs:
            f.write(f"{k} = {v}\n")


def _read_manifest(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            text = f.read()
    except FileNotFoundError:
        raise ManifestError(f"missing manifest {path!r}") from None
    for line in text.split("\n"):
        if not line:
            continue
        if " = " not in line:
            raise ManifestError(f"bad manifest line {line!r} in {path!r}")
        k, v = line.split(" = ", 1)
        out[k] = v
    return out


def _escape_field_text(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def _unescape_field_text(s: str) -> str:
    out = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            if nxt == "n":
                out.append("\n")
            elif nxt == "r":
                out.append("\r")
            elif nxt == "\\":
                out.append("\\")
            else:
                out.append(nxt)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _join_keys(keys: list[str]) -> str:
    # comma-separated with \\ and \, escapes so keys containing commas
    # survive the round trip
    return ",".join(
        k.replace("\\", "\\\\").replace(",", "\\,").replace("\n", "\\n") for k in keys
    )


def _split_keys(joined: str) -> list[str]:
    if not joined:
        return []
    parts: list[str] = []
    buf: list[str] = []
    i = 0
    while i < len(joined):
        ch = joined[i]
        if ch == "\\" and i + 1 < len(joined):
            nxt = joined[i + 1]
            if nxt == ",":
                buf.append(",")
            elif nxt == "\\":
                buf.append("\\")
            elif nxt == "n":
                buf.append("\n")
            else:
                buf.append(nxt)
            i += 2
            continue
        if ch == ",":
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    parts.append("".join(buf))
    return parts
