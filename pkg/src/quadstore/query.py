"""Queries over the four-table layout, planned with the degree table.

Every function returns a QueryResult: an associative array plus the
tables it read, how many stored entries the scans touched, and a
provenance trail of (action, key) steps for inspecting the plan.

Row keys are taken as stored; when the schema flips keys on ingest,
callers translate with flip_key() before querying and after reading
results.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .assoc import AssocArray, AssocValue
from .schema import DEGREE_COL, TEXT_COL, QuadSchema
from .store import ScanStats

log = logging.getLogger(__name__)


@dataclass
class QueryResult:
    array: AssocArray
    tables_read: list[str] = field(default_factory=list)
    entries_scanned: int = 0
    provenance: list[tuple[str, str]] = field(default_factory=list)


def _value(v: str) -> AssocValue:
    """Stored values that parse as numbers come back numeric; anything
    else stays text. Raw-text reads bypass this on purpose."""
    try:
        return float(v)
    except ValueError:
        return v


def get_row(schema: QuadSchema, row: str) -> QueryResult:
    """All pairs of one record: the edge-table row as a 1 x n array."""
    stats = ScanStats()
    found = schema.edge.scan(row=row, stats=stats)
    array = AssocArray.from_triples((r, c, _value(v)) for r, c, v in found)
    return QueryResult(
        array, [schema.edge.name], stats.entries_scanned, [("fetch", row)]
    )


def get_by_column(schema: QuadSchema, pair: str) -> QueryResult:
    """All records carrying one field|value pair, read from the
    transpose table but returned in edge orientation (record x pair)."""
    stats = ScanStats()
    found = schema.transpose.scan(row=pair, stats=stats)
    array = AssocArray.from_triples((c, r, _value(v)) for r, c, v in found)
    return QueryResult(
        array, [schema.transpose.name], stats.entries_scanned, [("fetch", pair)]
    )


def degree_of(schema: QuadSchema, pairs: Sequence[str]) -> QueryResult:
    """Degrees of the given pairs as a n x 1 array against 'Degree'.
    Pairs absent from the degree table come back as explicit 0.0 so
    callers can see the zero instead of a missing key."""
    stats = ScanStats()
    provenance = []
    cells = []
    for pair in dict.fromkeys(pairs):  # dedup, keep order
        found = schema.degree.scan(row=pair, col=DEGREE_COL, stats=stats)
        value = _value(found[0].value) if found else 0.0
        cells.append((pair, DEGREE_COL, value))
        provenance.append(("degree", pair))
    array = AssocArray.from_triples(cells)
    return QueryResult(array, [schema.degree.name], stats.entries_scanned, provenance)


def and_query(schema: QuadSchema, pairs: Sequence[str]) -> QueryResult:
    """Records carrying ALL of the given pairs.

    Plan: read each pair's degree, visit pairs in ascending degree
    order (ties bytewise), fetch the rarest pair's record list from the
    transpose table, then narrow. A pair whose degree exceeds the
    surviving candidate count is checked by point probes against the
    edge table; a rarer pair is fetched wholesale and intersected. Any
    zero degree short-circuits to an empty result. Scanned entries stay
    within k*d_min + k for k pairs with minimum degree d_min.
    """
    unique = list(dict.fromkeys(pairs))
    if not unique:
        return QueryResult(AssocArray.empty())

    deg = degree_of(schema, unique)
    degrees = {p: deg.array.get(p, DEGREE_COL, 0.0) for p in unique}
    tables = [schema.degree.name]
    provenance = list(deg.provenance)
    scanned = deg.entries_scanned

    order = sorted(unique, key=lambda p: (degrees[p], p))
    if degrees[order[0]] == 0.0:
        provenance.append(("shortcircuit", order[0]))
        return QueryResult(AssocArray.empty(), tables, scanned, provenance)

    stats = ScanStats()
    first = order[0]
    candidates = [t.col for t in schema.transpose.scan(row=first, stats=stats)]
    provenance.append(("fetch", first))
    tables.append(schema.transpose.name)

    for pair in order[1:]:
        if not candidates:
            break
        if len(candidates) < degrees[pair]:
            kept = []
            for cand in candidates:
                if schema.edge.scan(row=cand, col=pair, stats=stats):
                    kept.append(cand)
            candidates = kept
            provenance.append(("probe", pair))
            if schema.edge.name not in tables:
                tables.append(schema.edge.name)
        else:
            present = {t.col for t in schema.transpose.scan(row=pair, stats=stats)}
            candidates = [c for c in candidates if c in present]
            provenance.append(("fetch", pair))

    scanned += stats.entries_scanned
    cells = [(row, pair, 1.0) for row in candidates for pair in unique]
    return QueryResult(AssocArray.from_triples(cells), tables, scanned, provenance)


def row_range(schema: QuadSchema, lo: str, hi: str) -> QueryResult:
    """Edge-table rows in the inclusive key range lo..hi."""
    stats = ScanStats()
    found = schema.edge.scan(lo=lo, hi=hi, stats=stats)
    array = AssocArray.from_triples((r, c, _value(v)) for r, c, v in found)
    return QueryResult(
        array, [schema.edge.name], stats.entries_scanned, [("range", f"{lo}..{hi}")]
    )


def row_prefix(schema: QuadSchema, prefix: str) -> QueryResult:
    """Edge-table rows whose key starts with the prefix."""
    stats = ScanStats()
    found = schema.edge.scan(prefix=prefix, stats=stats)
    array = AssocArray.from_triples((r, c, _value(v)) for r, c, v in found)
    return QueryResult(
        array, [schema.edge.name], stats.entries_scanned, [("prefix", prefix)]
    )


def get_raw_text(schema: QuadSchema, rows: str | Sequence[str]) -> QueryResult:
    """Raw text of one or more records. Values stay text verbatim, even
    when they happen to look numeric."""
    if isinstance(rows, str):
        rows = [rows]
    stats = ScanStats()
    provenance = []
    cells = []
    for row in dict.fromkeys(rows):
        for t in schema.text.scan(row=row, col=TEXT_COL, stats=stats):
            cells.append((t.row, t.col, t.value))
        provenance.append(("fetch", row))
    array = AssocArray.from_triples(cells)
    return QueryResult(array, [schema.text.name], stats.entries_scanned, provenance)
