from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from espindata.cli import main
from espindata.fixtures import write_corpus
from espindata.platform import Platform

from conftest import make_golden_doc


@pytest.fixture
def runner():
    return CliRunner()


def _write_json(path, payload):
    path.write_text(json.dumps(payload, ensure_ascii=False), "utf-8")
    return str(path)


def test_validate_passing_record(runner, tmp_path):
    record_path = _write_json(tmp_path / "record.json", make_golden_doc())
    result = runner.invoke(main, ["validate", record_path])
    assert result.exit_code == 0
    assert "PASSED" in result.output


def test_validate_humidity_violation_exits_nonzero(runner, tmp_path):
    doc = make_golden_doc()
    doc["ambient"]["humidity"] = {"value": 150.0, "unit": "%RH"}
    record_path = _write_json(tmp_path / "record.json", doc)
    result = runner.invoke(main, ["validate", record_path])
    assert result.exit_code == 1
    assert "P-HUM" in result.output


def test_validate_json_output(runner, tmp_path):
    record_path = _write_json(tmp_path / "record.json", make_golden_doc())
    result = runner.invoke(main, ["validate", record_path, "--json"])
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["passed"] is True


def test_validate_malformed_record(runner, tmp_path):
    doc = make_golden_doc()
    doc["solution"]["ph"] = 99.0
    record_path = _write_json(tmp_path / "record.json", doc)
    result = runner.invoke(main, ["validate", record_path])
    assert result.exit_code == 1
    assert "malformed_record" in result.output


def test_import_and_release_cycle(runner, tmp_path):
    corpus_path = tmp_path / "corpus.json"
    write_corpus(corpus_path, 30, seed=17)
    data_dir = str(tmp_path / "data")

    result = runner.invoke(main, ["--data", data_dir, "import", str(corpus_path)])
    assert result.exit_code == 0, result.output
    assert "accepted 30 of 30" in result.output

    result = runner.invoke(main, ["--data", data_dir, "release", "cut"])
    assert result.exit_code == 0
    assert "v1" in result.output and "30 record(s)" in result.output

    result = runner.invoke(main, ["--data", data_dir, "release", "list"])
    assert result.exit_code == 0
    assert result.output.startswith("v1")


def test_import_count_coherence_with_release(runner, tmp_path):
    corpus_path = tmp_path / "corpus.json"
    write_corpus(corpus_path, 12, seed=2)
    data_dir = str(tmp_path / "data")
    runner.invoke(main, ["--data", data_dir, "import", str(corpus_path)])
    result = runner.invoke(main, ["--data", data_dir, "release", "cut", "--json"])
    manifest = json.loads(result.output)
    assert manifest["record_count"] == 12


def test_query_with_stats_json(runner, tmp_path):
    corpus_path = tmp_path / "corpus.json"
    write_corpus(corpus_path, 120, seed=23)
    data_dir = str(tmp_path / "data")
    runner.invoke(main, ["--data", data_dir, "import", str(corpus_path)])

    result = runner.invoke(
        main,
        ["--data", data_dir, "query", "--polymer", "PVA", "--json"],
    )
    assert result.exit_code == 0, result.output
    page = json.loads(result.output)

    platform = Platform(data_dir=data_dir)
    from espindata.query import FilterSpec

    expected = platform.query.execute_filter(FilterSpec(polymer_ids=frozenset({"PVA"})))
    assert page["total"] == len(expected)

    result = runner.invoke(
        main,
        [
            "--data", data_dir, "query",
            "--polymer", "PVA",
            "--stats", "--fields", "voltage,flow_rate",
            "--json",
        ],
    )
    assert result.exit_code == 0, result.output
    stats_doc = json.loads(result.output)
    stats = platform.query.summarize(expected, ["voltage", "flow_rate"])
    assert stats_doc["fields"]["voltage"]["median"] == stats.fields["voltage"].median


def test_query_range_flag(runner, tmp_path):
    corpus_path = tmp_path / "corpus.json"
    write_corpus(corpus_path, 50, seed=29)
    data_dir = str(tmp_path / "data")
    runner.invoke(main, ["--data", data_dir, "import", str(corpus_path)])
    result = runner.invoke(
        main,
        ["--data", data_dir, "query", "--fiber-diameter", "180:380", "--json"],
    )
    assert result.exit_code == 0
    page = json.loads(result.output)
    for item in page["items"]:
        assert 180 <= item["fiber_diameter_nm"] <= 380


def test_snapshot_and_restore(runner, tmp_path):
    corpus_path = tmp_path / "corpus.json"
    write_corpus(corpus_path, 10, seed=31)
    data_dir = str(tmp_path / "data")
    runner.invoke(main, ["--data", data_dir, "import", str(corpus_path)])

    archive = str(tmp_path / "snap.zip")
    result = runner.invoke(main, ["--data", data_dir, "snapshot", archive])
    assert result.exit_code == 0, result.output

    restored_dir = str(tmp_path / "restored")
    result = runner.invoke(main, ["--data", restored_dir, "restore", archive])
    assert result.exit_code == 0, result.output
    assert "restored 10 record(s)" in result.output

    original = Platform(data_dir=data_dir).store.content_digest()
    assert Platform(data_dir=restored_dir).store.content_digest() == original


def test_fixtures_command(runner, tmp_path):
    out = str(tmp_path / "corpus.json")
    result = runner.invoke(main, ["fixtures", "--count", "5", "--seed", "1", "--out", out])
    assert result.exit_code == 0
    corpus = json.loads((tmp_path / "corpus.json").read_text("utf-8"))
    assert len(corpus) == 5


def test_missing_data_dir_is_usage_error(runner, tmp_path):
    corpus_path = _write_json(tmp_path / "corpus.json", [make_golden_doc()])
    result = runner.invoke(main, ["import", corpus_path], env={"ESD_DATA_DIR": None})
    assert result.exit_code == 2
    assert "data directory" in result.output
