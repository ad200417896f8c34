import csv
import os

import pytest

from quadstore.cli import main, printable_splits

SPEC = """\
# tweet-shaped records
rowkey = id
explode = stat, time, user
text = text
tokens = word
null = null
flip = true
"""

TSV = (
    "id\tstat\ttime\tuser\ttext\n"
    "100\t200\t2011-01-31\talice\thi there\n"
    "101\t200\t2011-02-01\tbob\thi world\n"
    "102\t302\t2011-02-02\talice\t\n"
)


@pytest.fixture
def store(tmp_path):
    root = str(tmp_path / "store")
    spec = tmp_path / "records.conf"
    spec.write_text(SPEC, encoding="utf-8")
    data = tmp_path / "tweets.tsv"
    data.write_text(TSV, encoding="utf-8")
    assert main(["init", "--base", "tw", "--dir", root, "--flip"]) == 0
    assert main([
        "ingest", "--dir", root, "--base", "tw",
        "--input", str(data), "--format", "tsv", "--spec", str(spec),
    ]) == 0
    return root, str(spec), str(data)


def out_lines(capsys):
    return [l for l in capsys.readouterr().out.split("\n") if l]


def test_init_refuses_existing(store, capsys):
    root, _, _ = store
    assert main(["init", "--base", "tw", "--dir", root]) == 1
    assert "already holds a store" in capsys.readouterr().err


def test_query_row(store, capsys):
    root, _, _ = store
    capsys.readouterr()
    assert main(["query", "row", "--dir", root, "--base", "tw",
                 "--key", "001"]) == 0
    captured = capsys.readouterr()
    lines = [l for l in captured.out.split("\n") if l]
    assert lines == [
        "001\tstat|200\t1",
        "001\ttime|2011-01-31\t1",
        "001\tuser|alice\t1",
        "001\tword|hi\t1",
        "001\tword|there\t1",
    ]
    assert "# scanned" in captured.err


def test_query_col_and_degree(store, capsys):
    root, _, _ = store
    capsys.readouterr()
    assert main(["query", "col", "--dir", root, "--base", "tw",
                 "--key", "user|alice"]) == 0
    lines = out_lines(capsys)
    assert lines == ["001\tuser|alice\t1", "201\tuser|alice\t1"]

    assert main(["query", "degree", "--dir", root, "--base", "tw",
                 "--key", "user|alice", "--key", "user|nobody"]) == 0
    lines = out_lines(capsys)
    assert lines == ["user|alice\tDegree\t2", "user|nobody\tDegree\t0"]


def test_query_and_text(store, capsys):
    root, _, _ = store
    capsys.readouterr()
    assert main(["query", "and", "--dir", root, "--base", "tw",
                 "--key", "word|hi", "--key", "user|alice"]) == 0
    lines = out_lines(capsys)
    assert lines == ["001\tuser|alice\t1", "001\tword|hi\t1"]

    assert main(["query", "text", "--dir", root, "--base", "tw",
                 "--key", "001", "--key", "201"]) == 0
    lines = out_lines(capsys)
    assert lines == ["001\ttext\thi there", "201\ttext\tnull"]


def test_stats_reports_consistency(store, capsys):
    root, _, _ = store
    capsys.readouterr()
    assert main(["stats", "--dir", root, "--base", "tw"]) == 0
    out = capsys.readouterr().out
    assert "twedge: " in out
    assert "twedgeT: " in out
    assert "twedgeDeg: " in out
    assert "twedgeTxt: " in out
    assert "consistency: ok" in out


def test_wrong_base_is_an_error(store, capsys):
    root, _, _ = store
    assert main(["query", "row", "--dir", root, "--base", "other",
                 "--key", "001"]) == 1
    assert "holds base 'tw'" in capsys.readouterr().err


def test_missing_store_dir(tmp_path, capsys):
    assert main(["query", "row", "--dir", str(tmp_path / "nope"),
                 "--base", "tw", "--key", "x"]) == 1
    assert "error:" in capsys.readouterr().err


def test_flip_conflict(store, tmp_path, capsys):
    root, _, data = store
    spec = tmp_path / "noflip.conf"
    spec.write_text(SPEC.replace("flip = true", "flip = false"), encoding="utf-8")
    assert main([
        "ingest", "--dir", root, "--base", "tw",
        "--input", data, "--format", "tsv", "--spec", str(spec),
    ]) == 1
    assert "flip" in capsys.readouterr().err


def test_bad_records_exit_code(store, tmp_path, capsys):
    root, spec, _ = store
    data = tmp_path / "bad.tsv"
    data.write_text(
        "id\tstat\ttime\tuser\ttext\n"
        "103\t200\t2011-03-01\tcarl\tok line\n"
        "\t200\t2011-03-02\tdora\tmissing id\n"
        "too\tfew\n",
        encoding="utf-8",
    )
    assert main([
        "ingest", "--dir", root, "--base", "tw",
        "--input", str(data), "--format", "tsv", "--spec", spec,
    ]) == 3
    captured = capsys.readouterr()
    assert "bad 2" in captured.out
    assert "bad record at line" in captured.err
    # the good record still landed and the store still verifies
    capsys.readouterr()
    assert main(["query", "row", "--dir", root, "--base", "tw",
                 "--key", "301"]) == 0
    assert "301\tuser|carl\t1" in out_lines(capsys)


def test_ingest_is_persistent_across_commands(store, capsys):
    # a second ingest accumulates degrees on top of the restored store
    root, spec, data = store
    capsys.readouterr()
    assert main([
        "ingest", "--dir", root, "--base", "tw",
        "--input", data, "--format", "tsv", "--spec", spec,
    ]) == 0
    assert main(["query", "degree", "--dir", root, "--base", "tw",
                 "--key", "user|alice"]) == 0
    assert out_lines(capsys)[-1] == "user|alice\tDegree\t4"


def test_init_with_presplits(tmp_path, capsys):
    root = str(tmp_path / "split-store")
    assert main(["init", "--base", "tw", "--dir", root,
                 "--presplits", "4"]) == 0
    capsys.readouterr()
    assert main(["stats", "--dir", root, "--base", "tw"]) == 0
    out = capsys.readouterr().out
    assert "5 tablet(s)" in out


def test_printable_splits_shape():
    keys = printable_splits(9)
    assert len(keys) == 9
    assert keys == sorted(keys)
    assert all(len(k) == 1 and "!" <= k <= "~" for k in keys)


def test_bench_command(tmp_path, capsys):
    report = str(tmp_path / "bench.csv")
    assert main(["bench", "--scale", "5", "--edgefactor", "4",
                 "--batch", "64", "--presplits", "3",
                 "--report", report]) == 0
    out = capsys.readouterr().out
    assert "consistency ok" in out
    with open(report, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["elapsed_s", "cumulative_entries", "inst_rate_eps"]
    assert len(rows) >= 2


def test_ingest_jsonl_and_parallel(tmp_path, capsys):
    root = str(tmp_path / "jstore")
    spec = tmp_path / "records.conf"
    spec.write_text(SPEC, encoding="utf-8")
    data = tmp_path / "tweets.jsonl"
    data.write_text(
        '{"id": "100", "stat": 200, "user": "alice", "text": "hi there"}\n'
        '{"id": "101", "stat": 200, "user": "bob", "text": null}\n',
        encoding="utf-8",
    )
    assert main(["init", "--base", "tw", "--dir", root, "--flip"]) == 0
    assert main([
        "ingest", "--dir", root, "--base", "tw",
        "--input", str(data), "--format", "jsonl", "--spec", str(spec),
        "--batch", "1", "--ingestors", "2",
    ]) == 0
    capsys.readouterr()
    assert main(["query", "row", "--dir", root, "--base", "tw",
                 "--key", "101"]) == 0
    lines = out_lines(capsys)
    assert "101\tstat|200\t1" in lines
    assert "101\ttime|null\t1" in lines
    assert "101\tword|null\t1" in lines
