"""Command-line front end: init, ingest, query, bench, stats.

A store lives in a directory: the persisted tables plus a small
schema.conf recording the base name and whether record keys are
flipped. Commands restore the store, do their work, and (for ingest)
snapshot it back.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import bench as bench_mod
from . import query as query_mod
from .parse import (
    BadRecord,
    ExplodeError,
    explode,
    load_record_spec,
    parse_delimited,
    parse_json_lines,
)
from .schema import (
    SUFFIXES,
    IngestStats,
    ingest_batch,
    init_schema,
    open_schema,
    verify_schema,
)
from .store import MANIFEST_NAME, StoreError, TripleStore
from .triples import format_line, format_value

log = logging.getLogger(__name__)

SCHEMA_CONF = "schema.conf"


class CliError(Exception):
    pass


def _write_conf(root: str, base: str, flip: bool) -> None:
    with open(os.path.join(root, SCHEMA_CONF), "w", encoding="utf-8") as f:
        f.write(f"base = {base}\n")
        f.write(f"flip = {'true' if flip else 'false'}\n")


def _read_conf(root: str) -> tuple[str, bool]:
    path = os.path.join(root, SCHEMA_CONF)
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().split("\n")
    except FileNotFoundError:
        raise CliError(f"{root!r} is not a store directory (no {SCHEMA_CONF})") from None
    conf = {}
    for line in lines:
        if " = " in line:
            k, v = line.split(" = ", 1)
            conf[k] = v
    if "base" not in conf or conf.get("flip") not in ("true", "false"):
        raise CliError(f"malformed {path!r}")
    return conf["base"], conf["flip"] == "true"


def _open(root: str, base: str):
    store = TripleStore.restore(root)
    conf_base, flip = _read_conf(root)
    if base != conf_base:
        raise CliError(
            f"store at {root!r} holds base {conf_base!r}, not {base!r}"
        )
    return store, open_schema(store, base, flip)


def printable_splits(count: int) -> list[str]:
    """Evenly spaced single printable-ASCII characters, a reasonable
    default when the key distribution is unknown."""
    lo, hi = 0x21, 0x7E
    keys = {chr(lo + i * (hi - lo) // (count + 1)) for i in range(1, count + 1)}
    return sorted(keys)


def cmd_init(args) -> int:
    root = args.dir
    if os.path.exists(os.path.join(root, MANIFEST_NAME)):
        raise CliError(f"{root!r} already holds a store")
    store = TripleStore()
    splits = None
    if args.presplits:
        keys = printable_splits(args.presplits)
        splits = {suffix: keys for suffix in SUFFIXES}
    init_schema(store, args.base, flip=args.flip, splits=splits)
    os.makedirs(root, exist_ok=True)
    store.snapshot(root)
    _write_conf(root, args.base, args.flip)
    print(f"initialized {args.base!r} in {root}  flip={args.flip}")
    return 0


def cmd_ingest(args) -> int:
    store, schema = _open(args.dir, args.base)
    spec = load_record_spec(args.spec)
    if spec.flip is not None and spec.flip != schema.flip:
        raise CliError(
            f"record spec says flip={spec.flip}, store was initialized "
            f"with flip={schema.flip}"
        )

    t0 = time.monotonic()
    bad: list[BadRecord] = []
    exploded = []
    with open(args.input, "r", encoding="utf-8") as f:
        if args.format == "jsonl":
            parsed = parse_json_lines(f, spec.null_literal)
        else:
            delim = "\t" if args.format == "tsv" else ","
            parsed = parse_delimited(f, delim)
        for item in parsed:
            if isinstance(item, BadRecord):
                bad.append(item)
                continue
            try:
                exploded.append(explode(item, spec, flip=schema.flip))
            except ExplodeError as e:
                bad.append(BadRecord(item.line_no, "", str(e)))

    batches = [
        exploded[i : i + args.batch] for i in range(0, len(exploded), args.batch)
    ]
    totals = IngestStats()
    if args.ingestors > 1:
        with ThreadPoolExecutor(max_workers=args.ingestors) as pool:
            results = list(pool.map(lambda b: ingest_batch(schema, b), batches))
    else:
        results = [ingest_batch(schema, b) for b in batches]
    for r in results:
        totals.merge(r)
    store.snapshot(args.dir)
    elapsed = time.monotonic() - t0

    for b in bad[:5]:
        print(f"bad record at line {b.line_no}: {b.reason}", file=sys.stderr)
    if len(bad) > 5:
        print(f"... and {len(bad) - 5} more bad records", file=sys.stderr)
    print(
        f"ingested {totals.records} records in {elapsed:.2f}s  "
        f"edge entries {totals.edge_entries}  "
        f"degree mutations {totals.degree_mutations}  "
        f"presum reduction {totals.reduction_factor:.2f}x  "
        f"bad {len(bad)}"
    )
    return 0 if not bad else 3


def cmd_query(args) -> int:
    _, schema = _open(args.dir, args.base)
    keys = args.key
    if args.what == "row":
        results = [query_mod.get_row(schema, k) for k in keys]
    elif args.what == "col":
        results = [query_mod.get_by_column(schema, k) for k in keys]
    elif args.what == "and":
        results = [query_mod.and_query(schema, keys)]
    elif args.what == "degree":
        results = [query_mod.degree_of(schema, keys)]
    else:
        results = [query_mod.get_raw_text(schema, keys)]

    array = results[0].array
    for extra in results[1:]:
        array = array | extra.array
    for row, col, value in array.items():
        print(format_line(row, col, format_value(value)))
    scanned = sum(r.entries_scanned for r in results)
    tables = sorted({t for r in results for t in r.tables_read})
    print(
        f"# scanned {scanned} entries across {', '.join(tables) or 'no tables'}",
        file=sys.stderr,
    )
    return 0


def cmd_bench(args) -> int:
    cfg = bench_mod.BenchConfig(
        scale=args.scale,
        edgefactor=args.edgefactor,
        seed=args.seed,
        ingestors=args.ingestors,
        batch=args.batch,
        presplits=args.presplits,
        keymode=args.keymode,
    )
    report = bench_mod.run_ingest_bench(cfg)
    bench_mod.write_report_csv(report, args.report)
    print(
        f"scale {cfg.scale} edgefactor {cfg.edgefactor}: "
        f"{report.stats.records} records, {report.total_writes} writes "
        f"in {report.elapsed_s:.2f}s  ({report.overall_eps:.0f} entries/s)"
    )
    print(
        f"presum reduction {report.stats.reduction_factor:.2f}x  "
        f"consistency {'ok' if report.verified else 'FAILED'}"
    )
    for name, writes in report.tablet_writes.items():
        spread = " ".join(str(w) for w in writes)
        print(f"  {name}: {len(writes)} tablet(s), writes {spread}")
    print(f"samples written to {args.report}")
    return 0 if report.verified else 4


def cmd_stats(args) -> int:
    _, schema = _open(args.dir, args.base)
    for table in (schema.edge, schema.transpose, schema.degree, schema.text):
        stats = table.tablet_stats()
        total = sum(s.entries for s in stats)
        print(f"{table.name}: {total} entries in {len(stats)} tablet(s)")
        for s in stats:
            lo = "-inf" if s.lo is None else repr(s.lo)
            hi = "+inf" if s.hi is None else repr(s.hi)
            print(f"  ({lo}, {hi}]  entries {s.entries}  writes {s.writes}")
    report = verify_schema(schema)
    print(f"consistency: {'ok' if report.ok else 'FAILED'}")
    for p in report.problems:
        print(f"  {p}")
    return 0 if report.ok else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadstore",
        description="Exploded four-table triple store with associative-array queries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create an empty store directory")
    p.add_argument("--base", required=True, help="base table name")
    p.add_argument("--dir", required=True, help="store directory")
    p.add_argument("--flip", action="store_true", help="store record keys reversed")
    p.add_argument("--presplits", type=int, default=0, metavar="N",
                   help="pre-split each table with N printable-ASCII keys")
    p.set_defaults(fn=cmd_init)

    p = sub.add_parser("ingest", help="parse a file and write all four tables")
    p.add_argument("--dir", required=True)
    p.add_argument("--base", required=True)
    p.add_argument("--input", required=True, help="source file")
    p.add_argument("--format", required=True, choices=("tsv", "csv", "jsonl"))
    p.add_argument("--spec", required=True, help="record spec config file")
    p.add_argument("--batch", type=int, default=10000, help="records per batch")
    p.add_argument("--ingestors", type=int, default=1, help="parallel ingest threads")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("query", help="query the store")
    p.add_argument("what", choices=("row", "col", "and", "degree", "text"))
    p.add_argument("--dir", required=True)
    p.add_argument("--base", required=True)
    p.add_argument("--key", action="append", required=True,
                   help="row key or field|value pair; repeatable")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("bench", help="run the power-law ingest benchmark")
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--edgefactor", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ingestors", type=int, default=1)
    p.add_argument("--batch", type=int, default=10000)
    p.add_argument("--presplits", type=int, default=0)
    p.add_argument("--keymode", choices=("flipped", "sequential"), default="flipped")
    p.add_argument("--report", required=True, help="CSV file for throughput samples")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("stats", help="per-tablet stats and consistency check")
    p.add_argument("--dir", required=True)
    p.add_argument("--base", required=True)
    p.set_defaults(fn=cmd_stats)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("QUADSTORE_LOG", "WARNING"))
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, StoreError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
