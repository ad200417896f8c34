"""Associative-array algebra over an embedded sorted triple store,
with the exploded four-table schema, a parse pipeline, degree-planned
queries, and a power-law ingest benchmark."""

from .assoc import (
    ALL,
    MAX_MIN,
    PLUS_TIMES,
    AllKeys,
    AssocArray,
    CollisionError,
    ExactKeys,
    KeyPrefix,
    KeyRange,
    NonNumericError,
    PositionRange,
    RangeError,
    Semiring,
)
from .bench import (
    BenchConfig,
    BenchReport,
    CandleReport,
    RmatConfig,
    burning_candle_report,
    edges_to_records,
    rmat_generate,
    run_ingest_bench,
    write_report_csv,
)
from .parse import (
    BadRecord,
    ConfigError,
    ExplodeError,
    HeaderError,
    ParseError,
    RawRecord,
    RecordSpec,
    explode,
    load_record_spec,
    make_pair,
    parse_delimited,
    parse_json_lines,
    parse_record_spec,
    split_pair,
    tokenize,
)
from .query import (
    QueryResult,
    and_query,
    degree_of,
    get_by_column,
    get_raw_text,
    get_row,
    row_prefix,
    row_range,
)
from .schema import (
    ExplodedRecord,
    IngestStats,
    QuadSchema,
    VerifyReport,
    flip_key,
    ingest_batch,
    init_schema,
    open_schema,
    presum_batch,
    verify_schema,
)
from .store import (
    AppliedStats,
    CombinerError,
    CombinerKind,
    Mutation,
    ScanStats,
    Table,
    TableExistsError,
    TabletStats,
    TripleStore,
    UnknownTableError,
)
from .triples import Triple, TripleFormatError, read_triples, write_triples

__version__ = "0.1.0"
