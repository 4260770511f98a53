import json

import pytest

from fedsearch.bench import (
    BenchmarkReport,
    BenchmarkRow,
    CSV_COLUMNS,
    compute_efficiency,
    compute_speedup,
    emit_report,
    generate_workload,
    load_report_json,
    percentile_95,
    run_benchmark,
)
from fedsearch.config import BenchConfig
from fedsearch.errors import ConfigError
from fedsearch.query import validate_query


class TestSpeedup:
    def test_direct_formula(self):
        assert compute_speedup(100.0, 40.0) == pytest.approx(2.5)

    def test_identity(self):
        assert compute_speedup(123.4, 123.4) == 1.0

    def test_reported_scale_representable(self):
        # A system reaching speedup 2.59 at 11 nodes must fit in a row.
        row = BenchmarkRow(
            nodes=11,
            corpus_size=10_000_000,
            response_ms_mean=1000.0 / 2.59,
            response_ms_median=1000.0 / 2.59,
            response_ms_p95=1000.0 / 2.59,
            t_serial_ms=1000.0,
            speedup=compute_speedup(1000.0, 1000.0 / 2.59),
            efficiency=compute_efficiency(2.59, 11),
        )
        assert row.speedup == pytest.approx(2.59)
        assert row.efficiency == pytest.approx(2.59 / 11)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            compute_speedup(0.0, 10.0)
        with pytest.raises(ValueError):
            compute_speedup(10.0, -1.0)


class TestEfficiency:
    def test_identity(self):
        assert compute_efficiency(1.0, 1) == 1.0

    def test_formula(self):
        assert compute_efficiency(1.55, 2) == pytest.approx(0.775)
        assert compute_efficiency(2.59, 11) == pytest.approx(0.23545454545)

    def test_zero_nodes_rejected(self):
        with pytest.raises(ValueError):
            compute_efficiency(1.0, 0)


def test_percentile_95():
    assert percentile_95([5.0]) == 5.0
    data = [float(i) for i in range(1, 101)]
    assert percentile_95(data) == pytest.approx(95.05)
    with pytest.raises(ValueError):
        percentile_95([])


class TestWorkload:
    def test_deterministic_for_seed(self):
        assert generate_workload(5, 30) == generate_workload(5, 30)
        assert generate_workload(5, 30) != generate_workload(6, 30)

    def test_mix_counts(self):
        queries = generate_workload(1, 100, keyword_fraction=0.7)
        kinds = [q.kind for q in queries]
        assert kinds.count("keyword") == 70
        assert kinds.count("multivariate") == 30

    def test_all_queries_valid(self):
        for q in generate_workload(9, 200, keyword_fraction=0.5, top_k=7):
            validate_query(q)
            assert q.top_k == 7


def sample_report():
    rows = [
        BenchmarkRow(1, 1000, 100.0, 99.0, 120.0, 100.0, 1.0, 1.0),
        BenchmarkRow(2, 1000, 60.0, 58.0, 80.0, 100.0, 100.0 / 60.0, 100.0 / 60.0 / 2),
    ]
    return BenchmarkReport(config={"corpus_records": 1000}, rows=rows)


class TestEmitReport:
    def test_csv_columns_exact(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report(sample_report(), path, "csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "nodes,corpus_size,response_ms_mean,response_ms_median,response_ms_p95,t_serial_ms,speedup,efficiency"
        assert len(lines) == 3

    def test_empty_rows_header_only(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report(BenchmarkReport(config={}), path, "csv")
        assert path.read_text().splitlines() == [",".join(CSV_COLUMNS)]

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "r.json"
        report = sample_report()
        emit_report(report, path, "json")
        loaded = load_report_json(path)
        assert loaded.rows == report.rows
        assert loaded.config == report.config

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report(sample_report(), tmp_path / "r.xml", "xml")


def test_bench_config_validation(tmp_path):
    cfg = BenchConfig(corpus_records=10, corpus_seed=1, corpus_dir=str(tmp_path), nodes=[2, 4])
    with pytest.raises(ConfigError):
        cfg.validate()  # missing the n=1 baseline
    cfg = BenchConfig(corpus_records=10, corpus_seed=1, corpus_dir=str(tmp_path), repetitions=2)
    with pytest.raises(ConfigError):
        cfg.validate()


def report_identities(report):
    for row in report.rows:
        assert row.efficiency * row.nodes == pytest.approx(row.speedup, rel=1e-9)
        assert row.speedup * row.response_ms_mean == pytest.approx(row.t_serial_ms, rel=1e-9)
    baseline = [r for r in report.rows if r.nodes == 1]
    assert len(baseline) == 1
    assert baseline[0].speedup == 1.0
    assert baseline[0].efficiency == 1.0


@pytest.mark.slow
def test_small_benchmark_run(tmp_path):
    config = BenchConfig(
        corpus_records=2000,
        corpus_seed=11,
        corpus_dir=str(tmp_path / "corpus"),
        nodes=[1, 2],
        queries=4,
        repetitions=3,
        workload_seed=2,
        startup_timeout_s=30.0,
    )
    report = run_benchmark(config, workdir=tmp_path / "run")
    assert [r.nodes for r in report.rows] == [1, 2]
    assert report.missing == []
    report_identities(report)
    for row in report.rows:
        assert row.corpus_size == 2000
        assert row.response_ms_mean > 0
    out = tmp_path / "report.json"
    emit_report(report, out, "json")
    assert load_report_json(out).rows == report.rows
