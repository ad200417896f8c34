"""Shared randomized property checks.

Each check_* function runs `cases` independent random trials from a
caller-supplied seeded Random, asserting exact results against brute
force oracles. The fast unit tests run them with a few hundred cases;
the acceptance suite reruns them with at least a thousand each.

Numeric generators stay on integer-valued floats so sums and products
are exact regardless of accumulation order; every comparison here is
exact, never approximate.
"""

from __future__ import annotations

import random

from quadstore.assoc import (
    MAX_MIN,
    PLUS_TIMES,
    AssocArray,
    ExactKeys,
    KeyPrefix,
    KeyRange,
    PositionRange,
)
from quadstore.parse import make_pair
from quadstore.schema import (
    ExplodedRecord,
    ingest_batch,
    init_schema,
    verify_schema,
)
from quadstore.store import CombinerKind, Mutation, ScanStats, TripleStore
from quadstore.query import and_query, degree_of, get_row, row_prefix, row_range

# key alphabet mixes ASCII cases, digits, and multi-byte code points so
# code-point ordering gets exercised beyond plain lowercase
KEY_CHARS = "abcxyzABC019 _|\\éバΩ"


def rand_key(rng: random.Random, max_len: int = 6) -> str:
    return "".join(
        rng.choice(KEY_CHARS) for _ in range(rng.randint(1, max_len))
    )


def rand_int_value(rng: random.Random) -> float:
    return float(rng.randint(-9, 9))


def rand_text_value(rng: random.Random) -> str:
    return rand_key(rng, 5)


def rand_numeric_array(
    rng: random.Random, max_rows: int = 6, max_cols: int = 6
) -> AssocArray:
    rows = [rand_key(rng) for _ in range(rng.randint(1, max_rows))]
    cols = [rand_key(rng) for _ in range(rng.randint(1, max_cols))]
    cells = {}
    for r in rows:
        for c in cols:
            if rng.random() < 0.4:
                cells[(r, c)] = rand_int_value(rng)
    return AssocArray.from_triples((r, c, v) for (r, c), v in cells.items())


def rand_text_array(rng: random.Random) -> AssocArray:
    rows = [rand_key(rng) for _ in range(rng.randint(1, 5))]
    cols = [rand_key(rng) for _ in range(rng.randint(1, 5))]
    cells = {}
    for r in rows:
        for c in cols:
            if rng.random() < 0.4:
                cells[(r, c)] = rand_text_value(rng)
    return AssocArray.from_triples((r, c, v) for (r, c), v in cells.items())


def assert_well_formed(a: AssocArray) -> None:
    """Invariants every operation must preserve: keys sorted and
    duplicate-free, no key without entries, iteration in (row, col)
    order."""
    assert list(a.row_keys) == sorted(set(a.row_keys))
    assert list(a.col_keys) == sorted(set(a.col_keys))
    triples = a.to_triples()
    assert [(r, c) for r, c, _ in triples] == sorted((r, c) for r, c, _ in triples)
    live_rows = {r for r, _, _ in triples}
    live_cols = {c for _, c, _ in triples}
    assert set(a.row_keys) == live_rows
    assert set(a.col_keys) == live_cols
    assert a.nnz == len(triples)


def matmul_oracle(a: AssocArray, b: AssocArray, semiring) -> list:
    out: dict = {}
    for r, k, va in a.to_triples():
        for kk, c, vb in b.to_triples():
            if k != kk:
                continue
            p = semiring.mul(va, vb)
            out[(r, c)] = semiring.add(out[(r, c)], p) if (r, c) in out else p
    return sorted((r, c, v) for (r, c), v in out.items())


# ---------------------------------------------------------------------------
# assoc
# ---------------------------------------------------------------------------


def check_assoc_properties(rng: random.Random, cases: int) -> None:
    for _ in range(cases):
        a = rand_numeric_array(rng)
        b = rand_numeric_array(rng)

        # round trip
        assert AssocArray.from_triples(a.to_triples()) == a
        assert_well_formed(a)

        # key order is the UTF-8 byte order
        keys = [rand_key(rng) for _ in range(8)]
        assert sorted(keys) == [
            k.decode("utf-8") for k in sorted(x.encode("utf-8") for x in keys)
        ]

        # structural ops stay closed and invertible where they should be
        t = a.transpose()
        assert_well_formed(t)
        assert t.transpose() == a

        # element-wise algebra on numeric arrays: commutative add,
        # intersection multiplies, subtract against self zeroes values
        assert a + b == b + a
        assert (a & b) == (b & a)
        zeroed = a - a
        assert set(zeroed.to_triples()) == {(r, c, 0.0) for r, c, _ in a.to_triples()}
        assert_well_formed(a + b)
        assert_well_formed(a & b)
        assert_well_formed(a | b)

        # selection against brute force
        lo, hi = sorted([rand_key(rng), rand_key(rng)])
        sel = a.select(rows=KeyRange(lo, hi))
        assert sel.to_triples() == [
            (r, c, v) for r, c, v in a.to_triples() if lo <= r <= hi
        ]
        assert_well_formed(sel)
        prefix = rand_key(rng, 2)
        selp = a.select(cols=KeyPrefix(prefix))
        assert selp.to_triples() == [
            (r, c, v) for r, c, v in a.to_triples() if c.startswith(prefix)
        ]
        if a.row_count:
            i = rng.randint(1, a.row_count)
            j = rng.randint(i, a.row_count)
            keep = set(a.row_keys[i - 1 : j])
            selq = a.select(rows=PositionRange(i, j))
            assert selq.to_triples() == [
                (r, c, v) for r, c, v in a.to_triples() if r in keep
            ]
        some = {k for k in a.col_keys if rng.random() < 0.5}
        sele = a.select(cols=ExactKeys(sorted(some)))
        assert sele.to_triples() == [
            (r, c, v) for r, c, v in a.to_triples() if c in some
        ]

        # value filter against brute force
        cut = rand_int_value(rng)
        flt = a.value_filter(">=", cut)
        assert flt.to_triples() == [
            (r, c, v) for r, c, v in a.to_triples() if v >= cut
        ]

        # matmul against the dense oracle, numeric and fuzzy
        assert a.matmul(b, PLUS_TIMES).to_triples() == matmul_oracle(a, b, PLUS_TIMES)
        s = rand_text_array(rng)
        u = rand_text_array(rng)
        assert s.matmul(u, MAX_MIN).to_triples() == matmul_oracle(s, u, MAX_MIN)
        assert_well_formed(s.matmul(u, MAX_MIN))

        # sums against brute force
        if a.nnz:
            col_sums: dict = {}
            row_sums: dict = {}
            for r, c, v in a.to_triples():
                col_sums[c] = col_sums.get(c, 0.0) + v
                row_sums[r] = row_sums.get(r, 0.0) + v
            assert a.sum(1).to_triples() == sorted(
                ("", c, v) for c, v in col_sums.items()
            )
            assert a.sum(2).to_triples() == sorted(
                (r, "", v) for r, v in row_sums.items()
            )


# ---------------------------------------------------------------------------
# store
# ---------------------------------------------------------------------------


def _rand_mutations(rng: random.Random, n: int, numeric: bool) -> list[Mutation]:
    out = []
    for _ in range(n):
        value = str(rng.randint(-99, 99)) if numeric else rand_text_value(rng)
        out.append(Mutation(rand_key(rng, 4), rand_key(rng, 3), value))
    return out


def _combine_oracle(muts: list[Mutation], numeric: bool) -> list[tuple[str, str, str]]:
    cells: dict[tuple[str, str], str] = {}
    for m in muts:
        if (m.row, m.col) in cells and numeric:
            cells[(m.row, m.col)] = str(int(cells[(m.row, m.col)]) + int(m.value))
        else:
            cells[(m.row, m.col)] = m.value
    return sorted((r, c, v) for (r, c), v in cells.items())


def check_store_properties(rng: random.Random, cases: int) -> None:
    for case in range(cases):
        numeric = rng.random() < 0.5
        kind = CombinerKind.NUMERIC_SUM if numeric else CombinerKind.LAST_WINS
        muts = _rand_mutations(rng, rng.randint(1, 60), numeric)
        expect = _combine_oracle(muts, numeric)

        store = TripleStore()
        plain = store.create_table("plain", kind)
        plain.apply(muts)
        got = [(t.row, t.col, t.value) for t in plain.scan()]
        # scan comes back sorted and matches the fold oracle
        assert got == expect

        # split placement must not change scan results, and numericSum
        # must not care about write order or batch boundaries
        split_at = sorted({rand_key(rng, 3) for _ in range(rng.randint(1, 5))})
        sharded = store.create_table("sharded", kind)
        sharded.add_splits(split_at)
        shuffled = muts[:]
        if numeric:
            rng.shuffle(shuffled)
        i = 0
        while i < len(shuffled):
            step = rng.randint(1, 10)
            sharded.apply(shuffled[i : i + step])
            i += step
        assert [(t.row, t.col, t.value) for t in sharded.scan()] == expect

        # every tablet holds only rows inside its own bounds
        for tablet in sharded._tablets:
            for r, _ in tablet.keys:
                if tablet.lo is not None:
                    assert r > tablet.lo
                if tablet.hi is not None:
                    assert r <= tablet.hi

        # range and point scans against brute force
        lo, hi = sorted([rand_key(rng, 3), rand_key(rng, 3)])
        assert [
            (t.row, t.col, t.value) for t in sharded.scan(lo=lo, hi=hi)
        ] == [(r, c, v) for r, c, v in expect if lo <= r <= hi]
        some_row = muts[0].row
        assert [
            (t.row, t.col, t.value) for t in sharded.scan(row=some_row)
        ] == [(r, c, v) for r, c, v in expect if r == some_row]
        prefix = some_row[: rng.randint(1, len(some_row))]
        assert [
            (t.row, t.col, t.value) for t in sharded.scan(prefix=prefix)
        ] == [(r, c, v) for r, c, v in expect if r.startswith(prefix)]
        some_col = muts[0].col
        assert [
            (t.row, t.col, t.value) for t in sharded.scan(col=some_col)
        ] == [(r, c, v) for r, c, v in expect if c == some_col]
        stats = ScanStats()
        probe = sharded.scan(row=some_row, col=some_col, stats=stats)
        assert [(t.row, t.col, t.value) for t in probe] == [
            (r, c, v) for r, c, v in expect if r == some_row and c == some_col
        ]
        # exact-row point probes narrow to the key itself
        assert stats.entries_scanned <= 1

        # write accounting survives splitting
        assert sum(s.writes for s in sharded.tablet_stats()) == len(muts)


# ---------------------------------------------------------------------------
# schema
# ---------------------------------------------------------------------------


def rand_records(rng: random.Random, n: int) -> list[ExplodedRecord]:
    """Records with unique row keys (the regime where degree exactness
    is defined) and duplicate-prone pairs within a record."""
    rows = set()
    while len(rows) < n:
        rows.add(rand_key(rng, 8))
    fields = ["f", "g", "h"]
    out = []
    for row in sorted(rows):
        pairs = {
            make_pair(rng.choice(fields), rand_key(rng, 2))
            for _ in range(rng.randint(1, 6))
        }
        text = rand_text_value(rng) if rng.random() < 0.5 else None
        out.append(ExplodedRecord(row, tuple(sorted(pairs)), text))
    return out


def check_schema_properties(rng: random.Random, cases: int) -> None:
    for _ in range(cases):
        records = rand_records(rng, rng.randint(1, 25))
        store = TripleStore()
        schema = init_schema(store, "T", flip=False)

        # random batch boundaries must not affect the final tables
        i = 0
        while i < len(records):
            step = rng.randint(1, 8)
            ingest_batch(schema, records[i : i + step])
            i += step

        report = verify_schema(schema)
        assert report.mirror_ok, report.problems
        assert report.degree_ok, report.problems

        # independent oracle, straight from the records
        edges = sorted(
            {(r.row, p) for r in records for p in r.pairs}
        )
        got = [(t.row, t.col) for t in schema.edge.scan()]
        assert got == edges
        counts: dict[str, int] = {}
        for _, p in edges:
            counts[p] = counts.get(p, 0) + 1
        degree = {
            t.row: int(t.value) for t in schema.degree.scan()
        }
        assert degree == counts


# ---------------------------------------------------------------------------
# query
# ---------------------------------------------------------------------------


def build_query_corpus(rng: random.Random, n_records: int):
    """A corpus for query properties: returns (schema, by_row, by_pair)
    where the dicts are the brute-force truth."""
    records = rand_records(rng, n_records)
    store = TripleStore()
    schema = init_schema(store, "q")
    ingest_batch(schema, records)
    by_row = {r.row: set(r.pairs) for r in records}
    by_pair: dict[str, set[str]] = {}
    for r in records:
        for p in r.pairs:
            by_pair.setdefault(p, set()).add(r.row)
    return schema, by_row, by_pair


def check_query_properties(rng, schema, by_row, by_pair, cases: int) -> None:
    rows = sorted(by_row)
    pairs = sorted(by_pair)
    for _ in range(cases):
        # single-row fetch
        row = rng.choice(rows)
        res = get_row(schema, row)
        assert set(res.array.col_keys) == by_row[row]

        # degrees, including a key that is absent
        some = [rng.choice(pairs) for _ in range(rng.randint(1, 3))]
        missing = "f|" + rand_key(rng, 10)
        while missing in by_pair:
            missing += "?"
        res = degree_of(schema, some + [missing])
        for p in some:
            assert res.array.get(p, "Degree") == float(len(by_pair[p]))
        assert res.array.get(missing, "Degree") == 0.0

        # intersection query vs brute force
        k = rng.randint(1, 4)
        chosen = [rng.choice(pairs) for _ in range(k)]
        if rng.random() < 0.15:
            chosen.append(missing)
        res = and_query(schema, chosen)
        want = set(by_row)
        for p in chosen:
            want &= by_pair.get(p, set())
        assert set(res.array.row_keys) == want

        # planner contract: rarest key first, zero short-circuits,
        # work stays within k*d_min + k
        uniq = list(dict.fromkeys(chosen))
        degs = {p: len(by_pair.get(p, set())) for p in uniq}
        d_min = min(degs.values())
        fetches = [(a, key) for a, key in res.provenance if a == "fetch"]
        if d_min == 0:
            assert res.provenance[-1][0] == "shortcircuit"
            assert not fetches
        else:
            first = min(uniq, key=lambda p: (degs[p], p))
            assert fetches[0][1] == first
        assert res.entries_scanned <= len(uniq) * max(d_min, 1) + len(uniq)

        # range and prefix scans vs brute force
        lo, hi = sorted([rng.choice(rows), rng.choice(rows)])
        res = row_range(schema, lo, hi)
        assert set(res.array.row_keys) == {r for r in rows if lo <= r <= hi}
        p = rng.choice(rows)[: rng.randint(1, 3)]
        res = row_prefix(schema, p)
        assert set(res.array.row_keys) == {r for r in rows if r.startswith(p)}
