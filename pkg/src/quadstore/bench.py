"""Power-law graph ingest benchmark and key-distribution demos.

Edges come from the recursive-quadrant (R-MAT) generator with the
Graph500 defaults (a=0.57, b=0.19, c=0.19, d=0.05). Each edge becomes
one record (id, start vertex, end vertex) and flows through the full
exploded-schema ingest: pre-summed batches into the four tables, with
a sampler thread recording cumulative writes about once a second.

Generation is deterministic per (seed, edge index): every edge gets its
own PRNG, so the stream does not depend on chunking or thread count.
"""

from __future__ import annotations

import csv
import logging
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .parse import RawRecord, RecordSpec, explode
from .schema import (
    DEGREE,
    EDGE,
    TEXT,
    TRANSPOSE,
    IngestStats,
    QuadSchema,
    flip_key,
    ingest_batch,
    init_schema,
    verify_schema,
)
from .store import CombinerKind, Mutation, TripleStore

log = logging.getLogger(__name__)

KEYMODE_FLIPPED = "flipped"
KEYMODE_SEQUENTIAL = "sequential"


@dataclass(frozen=True)
class RmatConfig:
    """Recursive-quadrant edge generator parameters. scale sets the
    vertex count (2**scale); edgefactor sets edges per vertex."""

    scale: int
    edgefactor: int = 16
    a: float = 0.57
    b: float = 0.19
    c: float = 0.19
    d: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError(f"scale must be >= 1, got {self.scale}")
        if self.edgefactor < 1:
            raise ValueError(f"edgefactor must be >= 1, got {self.edgefactor}")
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("quadrant probabilities must be non-negative")
        total = self.a + self.b + self.c + self.d
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"quadrant probabilities sum to {total}, want 1")

    @property
    def vertex_count(self) -> int:
        return 1 << self.scale

    @property
    def edge_count(self) -> int:
        return self.edgefactor << self.scale


def rmat_generate(cfg: RmatConfig) -> list[tuple[int, int]]:
    """All edges as (start, end) vertex numbers. Edge i is derived from
    its own Random(f"{seed}:{i}"), which hashes the string seed
    platform-independently."""
    edges = []
    ab = cfg.a + cfg.b
    abc = ab + cfg.c
    for i in range(cfg.edge_count):
        rng = random.Random(f"{cfg.seed}:{i}")
        u = 0
        v = 0
        for _ in range(cfg.scale):
            u <<= 1
            v <<= 1
            r = rng.random()
            if r < cfg.a:
                pass
            elif r < ab:
                v |= 1
            elif r < abc:
                u |= 1
            else:
                u |= 1
                v |= 1
        edges.append((u, v))
    return edges


def edges_to_records(
    edges: list[tuple[int, int]], scale: int
) -> list[dict[str, str]]:
    """One record per edge: zero-padded decimal edge id as the row key
    plus padded start/end vertex labels, so keys sort numerically."""
    idw = max(1, len(str(len(edges) - 1)))
    vw = max(1, len(str((1 << scale) - 1)))
    return [
        {"id": str(i).zfill(idw), "start": str(u).zfill(vw), "end": str(v).zfill(vw)}
        for i, (u, v) in enumerate(edges)
    ]


BENCH_SPEC = RecordSpec(row_key="id", explode_fields=("start", "end"))


# ---------------------------------------------------------------------------
# Split helpers
# ---------------------------------------------------------------------------


def uniform_digit_splits(width: int, split_count: int) -> list[str]:
    """Split keys that cut the width-digit decimal space into
    split_count + 1 even pieces. Matches flipped zero-padded ids, whose
    leading characters are uniform."""
    parts = split_count + 1
    space = 10**width
    keys = {str(i * space // parts).zfill(width) for i in range(1, parts)}
    return sorted(keys)


def sequential_id_splits(count: int, split_count: int) -> list[str]:
    """Split keys that cut ids 0..count-1 (zero-padded) evenly."""
    width = max(1, len(str(count - 1)))
    parts = split_count + 1
    keys = {str(i * count // parts).zfill(width) for i in range(1, parts)}
    return sorted(keys)


def pair_splits(scale: int, split_count: int) -> list[str]:
    """Split keys for tables keyed by start|/end| vertex pairs: half the
    cuts inside end|, a boundary between the prefixes, the rest inside
    start|. Vertex skew makes the pieces uneven, but writes stop funnelling
    through one tablet."""
    if split_count < 1:
        return []
    vcount = 1 << scale
    vw = max(1, len(str(vcount - 1)))
    half = (split_count + 1) // 2
    rest = split_count + 1 - half
    keys = set()
    for j in range(1, half):
        keys.add("end|" + str(j * vcount // half).zfill(vw))
    keys.add("start|")  # everything end|* sorts below this
    for j in range(1, rest):
        keys.add("start|" + str(j * vcount // rest).zfill(vw))
    return sorted(keys)


# ---------------------------------------------------------------------------
# Ingest benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchConfig:
    scale: int
    edgefactor: int = 16
    seed: int = 0
    ingestors: int = 1
    batch: int = 10000
    presplits: int = 0  # split keys per table; 0 = one tablet
    keymode: str = KEYMODE_FLIPPED
    base: str = "bench"
    sample_interval: float = 1.0

    def __post_init__(self):
        if self.keymode not in (KEYMODE_FLIPPED, KEYMODE_SEQUENTIAL):
            raise ValueError(f"keymode must be flipped or sequential, got {self.keymode!r}")
        if self.ingestors < 1:
            raise ValueError("need at least one ingestor")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")


class Sample(NamedTuple):
    elapsed_s: float
    cumulative_entries: int
    inst_rate_eps: float


@dataclass
class BenchReport:
    config: BenchConfig
    elapsed_s: float
    total_writes: int
    overall_eps: float
    stats: IngestStats
    samples: list[Sample] = field(default_factory=list)
    tablet_writes: dict[str, list[int]] = field(default_factory=dict)
    verified: bool = False
    problems: list[str] = field(default_factory=list)


def _total_writes(schema: QuadSchema) -> int:
    tables = (schema.edge, schema.transpose, schema.degree, schema.text)
    return sum(s.writes for t in tables for s in t.tablet_stats())


def bench_splits(cfg: BenchConfig) -> dict[str, list[str]]:
    """Per-table split keys for a bench run. Record-keyed tables follow
    the keymode's id distribution; pair-keyed tables cut the vertex
    space."""
    if cfg.presplits < 1:
        return {}
    edges = cfg.edgefactor << cfg.scale
    if cfg.keymode == KEYMODE_FLIPPED:
        idw = max(1, len(str(edges - 1)))
        record_splits = uniform_digit_splits(idw, cfg.presplits)
    else:
        record_splits = sequential_id_splits(edges, cfg.presplits)
    pair = pair_splits(cfg.scale, cfg.presplits)
    return {EDGE: record_splits, TEXT: record_splits, TRANSPOSE: pair, DEGREE: pair}


def prepare_batches(cfg: BenchConfig) -> list[list]:
    """Generate, explode, and chunk all records up front so the timed
    region measures only the store."""
    rmat = RmatConfig(
        scale=cfg.scale, edgefactor=cfg.edgefactor, seed=cfg.seed
    )
    records = edges_to_records(rmat_generate(rmat), cfg.scale)
    flip = cfg.keymode == KEYMODE_FLIPPED
    exploded = [
        explode(RawRecord(i + 1, rec), BENCH_SPEC, flip=flip)
        for i, rec in enumerate(records)
    ]
    return [
        exploded[i : i + cfg.batch] for i in range(0, len(exploded), cfg.batch)
    ]


def run_ingest_bench(cfg: BenchConfig) -> BenchReport:
    """Run one full ingest into a fresh in-memory store and report
    timing, throughput samples, and a post-run consistency check."""
    batches = prepare_batches(cfg)
    store = TripleStore()
    schema = init_schema(
        store, cfg.base, flip=cfg.keymode == KEYMODE_FLIPPED, splits=bench_splits(cfg)
    )

    samples: list[tuple[float, int]] = []
    stop = threading.Event()
    t0 = time.monotonic()

    def sampler():
        while not stop.wait(cfg.sample_interval):
            samples.append((time.monotonic() - t0, _total_writes(schema)))

    tick = threading.Thread(target=sampler, daemon=True)
    tick.start()

    totals = IngestStats()
    if cfg.ingestors == 1:
        results = [ingest_batch(schema, b) for b in batches]
    else:
        with ThreadPoolExecutor(max_workers=cfg.ingestors) as pool:
            results = list(pool.map(lambda b: ingest_batch(schema, b), batches))
    elapsed = time.monotonic() - t0
    stop.set()
    tick.join()
    for r in results:
        totals.merge(r)

    total_writes = _total_writes(schema)
    samples.append((elapsed, total_writes))
    final: list[Sample] = []
    prev_t, prev_c = 0.0, 0
    for t, c in samples:
        dt = t - prev_t
        rate = (c - prev_c) / dt if dt > 0 else 0.0
        final.append(Sample(t, c, rate))
        prev_t, prev_c = t, c

    verify = verify_schema(schema)
    return BenchReport(
        config=cfg,
        elapsed_s=elapsed,
        total_writes=total_writes,
        overall_eps=total_writes / elapsed if elapsed > 0 else 0.0,
        stats=totals,
        samples=final,
        tablet_writes={
            t.name: [s.writes for s in t.tablet_stats()]
            for t in (schema.edge, schema.transpose, schema.degree, schema.text)
        },
        verified=verify.ok,
        problems=verify.problems,
    )


def write_report_csv(report: BenchReport, path: str) -> None:
    """Throughput samples as CSV: elapsed_s, cumulative_entries,
    inst_rate_eps."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["elapsed_s", "cumulative_entries", "inst_rate_eps"])
        for s in report.samples:
            w.writerow([f"{s.elapsed_s:.3f}", s.cumulative_entries, f"{s.inst_rate_eps:.1f}"])


# ---------------------------------------------------------------------------
# Burning-candle demo: what split keys do to sequential vs flipped ids
# ---------------------------------------------------------------------------


@dataclass
class CandleReport:
    count: int
    sequential_splits: list[str]
    flipped_splits: list[str]
    sequential_counts: list[int]
    flipped_counts: list[int]

    @property
    def sequential_top_share(self) -> float:
        """Fraction of all sequential-key writes landing in the single
        busiest tablet (the burning end of the candle)."""
        total = sum(self.sequential_counts)
        return max(self.sequential_counts) / total if total else 0.0

    @property
    def flipped_max_over_mean(self) -> float:
        """Busiest tablet's write count relative to the per-tablet mean
        under flipped keys; 1.0 is perfectly even."""
        counts = self.flipped_counts
        mean = sum(counts) / len(counts) if counts else 0.0
        return max(counts) / mean if mean else 0.0


def burning_candle_report(count: int = 100000, tablets: int = 10) -> CandleReport:
    """Contrast key layouts on ids 1..count, zero-padded.

    The sequential table gets demonstration splits taken as quantiles
    of the flipped key set, sensible for the keys the table was planned
    for; fed monotonically increasing keys instead, every write lands
    in the lowest tablet. The flipped table gets plain leading-digit
    splits and spreads almost evenly."""
    width = len(str(count))
    ids = [str(i).zfill(width) for i in range(1, count + 1)]
    flipped_sorted = sorted(flip_key(k) for k in ids)
    demo_splits = sorted(
        {flipped_sorted[i * count // tablets] for i in range(1, tablets)}
    )
    digit_splits = uniform_digit_splits(1, tablets - 1)

    store = TripleStore()
    seq = store.create_table("seq", CombinerKind.LAST_WINS)
    flip = store.create_table("flip", CombinerKind.LAST_WINS)
    seq.add_splits(demo_splits)
    flip.add_splits(digit_splits)
    seq.apply([Mutation(k, "x", "1") for k in ids])
    flip.apply([Mutation(flip_key(k), "x", "1") for k in ids])

    return CandleReport(
        count=count,
        sequential_splits=demo_splits,
        flipped_splits=digit_splits,
        sequential_counts=[s.writes for s in seq.tablet_stats()],
        flipped_counts=[s.writes for s in flip.tablet_stats()],
    )
