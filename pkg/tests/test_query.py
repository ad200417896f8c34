import random

import props
from quadstore.query import (
    and_query,
    degree_of,
    get_by_column,
    get_raw_text,
    get_row,
    row_prefix,
    row_range,
)
from quadstore.schema import ExplodedRecord, ingest_batch, init_schema
from quadstore.store import TripleStore


def _corpus():
    """Small fixed corpus: three records over a handful of pairs."""
    schema = init_schema(TripleStore(), "T")
    ingest_batch(
        schema,
        [
            ExplodedRecord("r1", ("stat|200", "word|hi", "word|pra"), "hi pra"),
            ExplodedRecord("r2", ("stat|200", "word|hi"), "hi"),
            ExplodedRecord("r3", ("stat|301", "word|pra"), "pra"),
        ],
    )
    return schema


def test_get_row():
    schema = _corpus()
    res = get_row(schema, "r1")
    assert res.array.to_triples() == [
        ("r1", "stat|200", 1.0),
        ("r1", "word|hi", 1.0),
        ("r1", "word|pra", 1.0),
    ]
    assert res.tables_read == ["Tedge"]
    assert res.entries_scanned == 3
    assert get_row(schema, "nope").array.nnz == 0


def test_get_by_column_returns_edge_orientation():
    schema = _corpus()
    res = get_by_column(schema, "word|hi")
    assert res.array.to_triples() == [
        ("r1", "word|hi", 1.0),
        ("r2", "word|hi", 1.0),
    ]
    assert res.tables_read == ["TedgeT"]


def test_degree_of_includes_zeros():
    schema = _corpus()
    res = degree_of(schema, ["word|hi", "word|nope", "stat|301"])
    assert res.array.get("word|hi", "Degree") == 2.0
    assert res.array.get("stat|301", "Degree") == 1.0
    # absent pair is an explicit zero entry, not a missing key
    assert res.array.get("word|nope", "Degree") == 0.0
    assert res.array.nnz == 3
    # each degree is a point probe
    assert res.entries_scanned == 2


def test_and_query_intersection():
    schema = _corpus()
    res = and_query(schema, ["word|hi", "word|pra"])
    assert res.array.row_keys == ("r1",)
    assert res.array.col_keys == ("word|hi", "word|pra")
    assert all(v == 1.0 for _, _, v in res.array.to_triples())


def test_and_query_plans_rarest_first():
    schema = _corpus()
    # stat|301 has degree 1, word|hi degree 2: fetch 301 first
    res = and_query(schema, ["word|hi", "stat|301"])
    fetches = [key for action, key in res.provenance if action == "fetch"]
    assert fetches[0] == "stat|301"
    assert res.array.row_keys == ()


def test_and_query_tie_breaks_bytewise():
    schema = _corpus()
    # word|pra and stat|301 both have degree... pra=2, use equal-degree keys
    res = and_query(schema, ["word|pra", "word|hi"])  # both degree 2
    fetches = [key for action, key in res.provenance if action == "fetch"]
    assert fetches[0] == "word|hi"  # 'h' < 'p'


def test_and_query_zero_short_circuits():
    schema = _corpus()
    res = and_query(schema, ["word|hi", "word|missing"])
    assert res.array.nnz == 0
    assert res.provenance[-1] == ("shortcircuit", "word|missing")
    # no fetch happened at all
    assert not [1 for a, _ in res.provenance if a == "fetch"]


def test_and_query_single_key_and_duplicates():
    schema = _corpus()
    res = and_query(schema, ["word|hi", "word|hi"])
    assert res.array.row_keys == ("r1", "r2")
    assert res.array.col_keys == ("word|hi",)
    assert and_query(schema, []).array.nnz == 0


def test_and_query_work_bound():
    schema = _corpus()
    res = and_query(schema, ["word|hi", "word|pra", "stat|200"])
    k = 3
    d_min = 2
    assert res.entries_scanned <= k * d_min + k


def test_row_range_and_prefix():
    schema = _corpus()
    assert row_range(schema, "r1", "r2").array.row_keys == ("r1", "r2")
    assert row_range(schema, "r2", "r2").array.row_keys == ("r2",)
    assert row_prefix(schema, "r").array.row_keys == ("r1", "r2", "r3")
    assert row_prefix(schema, "zz").array.nnz == 0


def test_get_raw_text_verbatim():
    schema = init_schema(TripleStore(), "T")
    # a text that looks numeric must stay text
    ingest_batch(schema, [ExplodedRecord("r1", ("word|42",), "42")])
    res = get_raw_text(schema, "r1")
    assert res.array.to_triples() == [("r1", "text", "42")]
    assert isinstance(res.array.get("r1", "text"), str)
    multi = get_raw_text(schema, ["r1", "missing"])
    assert multi.array.nnz == 1


def test_query_property_suite_fast():
    rng = random.Random(31)
    schema, by_row, by_pair = props.build_query_corpus(rng, 300)
    props.check_query_properties(rng, schema, by_row, by_pair, cases=150)
