"""The exploded four-table layout over the triple store.

A base name B owns four tables:

  Bedge     record key  -> field|value pair        = '1'
  BedgeT    field|value pair -> record key         = '1'   (mirror of Bedge)
  BedgeDeg  field|value pair -> 'Degree'           = count (numericSum)
  BedgeTxt  record key  -> 'text'                  = raw text

Record keys may be stored flipped (reversed) so that monotonically
increasing source keys spread across tablets instead of hammering the
last one. The transpose table lets any field|value pair be looked up as
a row; the degree table supports query planning without scanning.

Ingest pre-sums each batch into an associative array before writing:
duplicate (record, pair) entries collapse, and the degree table receives
one mutation per distinct pair in the batch rather than one per entry.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .assoc import AssocArray
from .store import CombinerKind, Mutation, Table, TripleStore

log = logging.getLogger(__name__)

EDGE = "edge"
TRANSPOSE = "edgeT"
DEGREE = "edgeDeg"
TEXT = "edgeTxt"
SUFFIXES = (EDGE, TRANSPOSE, DEGREE, TEXT)

DEGREE_COL = "Degree"
TEXT_COL = "text"


class SchemaError(Exception):
    pass


def flip_key(key: str) -> str:
    """Reverse a key so sequential keys differ in their leading characters.
    Involutive: flip_key(flip_key(k)) == k."""
    return key[::-1]


@dataclass(frozen=True)
class ExplodedRecord:
    """One source record ready for ingest: a (possibly flipped) record
    key, its sorted duplicate-free field|value pairs, and the raw text
    (None when the schema carries no text)."""

    row: str
    pairs: tuple[str, ...]
    text: str | None = None


@dataclass
class IngestStats:
    records: int = 0
    edge_entries: int = 0  # distinct (record, pair) entries written
    degree_mutations: int = 0  # one per distinct pair per batch
    text_entries: int = 0
    bad_records: int = 0

    @property
    def reduction_factor(self) -> float:
        """How many degree increments pre-summing saved: raw pair
        instances per degree mutation. 1.0 when nothing collapsed."""
        if self.degree_mutations == 0:
            return 1.0
        return self.edge_entries / self.degree_mutations

    def merge(self, other: "IngestStats") -> None:
        self.records += other.records
        self.edge_entries += other.edge_entries
        self.degree_mutations += other.degree_mutations
        self.text_entries += other.text_entries
        self.bad_records += other.bad_records


@dataclass
class QuadSchema:
    store: TripleStore
    base: str
    flip: bool
    edge: Table
    transpose: Table
    degree: Table
    text: Table

    @property
    def table_names(self) -> tuple[str, ...]:
        return tuple(self.base + s for s in SUFFIXES)


def init_schema(
    store: TripleStore,
    base: str,
    flip: bool = False,
    splits: dict[str, Sequence[str]] | None = None,
) -> QuadSchema:
    """Create the four tables for `base`. `splits` maps a table suffix
    ('edge', 'edgeT', 'edgeDeg', 'edgeTxt') to its initial split keys."""
    edge = store.create_table(base + EDGE)
    transpose = store.create_table(base + TRANSPOSE)
    degree = store.create_table(base + DEGREE, CombinerKind.NUMERIC_SUM)
    text = store.create_table(base + TEXT)
    schema = QuadSchema(store, base, flip, edge, transpose, degree, text)
    if splits:
        unknown = set(splits) - set(SUFFIXES)
        if unknown:
            raise SchemaError(f"unknown table suffixes in splits: {sorted(unknown)}")
        by_suffix = {EDGE: edge, TRANSPOSE: transpose, DEGREE: degree, TEXT: text}
        for suffix, keys in splits.items():
            by_suffix[suffix].add_splits(keys)
    return schema


def open_schema(store: TripleStore, base: str, flip: bool = False) -> QuadSchema:
    """Attach to an existing four-table layout (raises UnknownTableError
    when any table is missing)."""
    return QuadSchema(
        store,
        base,
        flip,
        store.table(base + EDGE),
        store.table(base + TRANSPOSE),
        store.table(base + DEGREE),
        store.table(base + TEXT),
    )


def presum_batch(
    records: Iterable[ExplodedRecord],
) -> tuple[AssocArray, list[Mutation]]:
    """Collapse a batch into an associative array (record x pair, value
    1.0 regardless of duplicates) plus the degree mutations: one
    (pair, 'Degree', n) per distinct pair, n = that pair's entry count
    in the batch."""
    array = AssocArray.from_triples(
        (r.row, p, 1.0) for r in records for p in r.pairs
    )
    counts: dict[str, int] = {}
    for _, pair, _ in array.items():
        counts[pair] = counts.get(pair, 0) + 1
    degree = [Mutation(pair, DEGREE_COL, str(n)) for pair, n in counts.items()]
    return array, degree


def ingest_batch(schema: QuadSchema, records: Sequence[ExplodedRecord]) -> IngestStats:
    """Write one batch to all four tables.

    The batch is pre-summed first; each table then takes one mutation
    batch. Records must already carry flipped keys when the schema was
    initialised with flip=True (explode handles that)."""
    array, degree_muts = presum_batch(records)
    edge_muts = [Mutation(r, c, "1") for r, c, _ in array.items()]
    transpose_muts = [Mutation(c, r, "1") for r, c, _ in array.items()]
    text_muts = [
        Mutation(rec.row, TEXT_COL, rec.text)
        for rec in records
        if rec.text is not None
    ]
    schema.edge.apply(edge_muts)
    schema.transpose.apply(transpose_muts)
    schema.degree.apply(degree_muts)
    if text_muts:
        schema.text.apply(text_muts)
    return IngestStats(
        records=len(records),
        edge_entries=len(edge_muts),
        degree_mutations=len(degree_muts),
        text_entries=len(text_muts),
    )


@dataclass
class VerifyReport:
    edge_entries: int = 0
    transpose_entries: int = 0
    degree_entries: int = 0
    text_entries: int = 0
    mirror_ok: bool = True
    degree_ok: bool = True
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.mirror_ok and self.degree_ok


def verify_schema(schema: QuadSchema, max_problems: int = 10) -> VerifyReport:
    """Full-scan consistency check: the transpose must mirror the edge
    table exactly, and every degree value must equal a fresh count of
    that pair's edge entries. Note the degree invariant only holds when
    record keys never repeat across batches; re-ingesting a record key
    with the same pair double-counts by design (the store has no
    read-modify-write path)."""
    report = VerifyReport()
    edge = schema.edge.scan()
    mirror = schema.transpose.scan()
    report.edge_entries = len(edge)
    report.transpose_entries = len(mirror)
    flipped = sorted((c, r, v) for r, c, v in edge)
    if flipped != [(r, c, v) for r, c, v in mirror]:
        report.mirror_ok = False
        want = set(flipped)
        got = {(r, c, v) for r, c, v in mirror}
        for r, c, _ in sorted(want - got):
            if len(report.problems) >= max_problems:
                break
            report.problems.append(f"transpose missing or differs at ({r!r}, {c!r})")
        for r, c, _ in sorted(got - want):
            if len(report.problems) >= max_problems:
                break
            report.problems.append(f"transpose has extra entry at ({r!r}, {c!r})")

    counts: dict[str, int] = {}
    for _, pair, _ in edge:
        counts[pair] = counts.get(pair, 0) + 1
    degrees = schema.degree.scan(col=DEGREE_COL)
    report.degree_entries = len(degrees)
    seen = set()
    for pair, _, value in degrees:
        seen.add(pair)
        want = counts.get(pair, 0)
        try:
            have = int(value)
        except ValueError:
            have = float(value)
        if have != want:
            report.degree_ok = False
            if len(report.problems) < max_problems:
                report.problems.append(
                    f"degree of {pair!r} is {value}, edge table has {want}"
                )
    for pair in counts:
        if pair not in seen:
            report.degree_ok = False
            if len(report.problems) < max_problems:
                report.problems.append(f"degree row missing for {pair!r}")

    report.text_entries = len(schema.text.scan(col=TEXT_COL))
    return report
