"""Scaling benchmark: response time vs node count, speedup, efficiency.

For each node count n the harness partitions the corpus into n pieces,
launches a fresh local deployment (n workers spread over the configured
VOs), runs the seeded query workload once as a warm-up and then
`repetitions` times sequentially, and records per-query wall time at the
client. speedup = t_serial / t_parallel (means); efficiency = speedup / n.
The n=1 row is the serial baseline by definition.
"""
from __future__ import annotations

import json
import logging
import random
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import transport, wire
from .config import BenchConfig
from .corpus import (
    KEYWORD_VOCAB,
    TITLE_VOCAB,
    VENUE_POOL,
    YEAR_HI,
    YEAR_LO,
    ABSTRACT_VOCAB,
    generate_corpus,
    load_manifest,
    partition_dataset,
)
from .deploy import DeploymentSpec, LocalDeployment, round_robin_workers
from .query import Query, FieldPredicate, YearRange, query_to_payload

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "nodes",
    "corpus_size",
    "response_ms_mean",
    "response_ms_median",
    "response_ms_p95",
    "t_serial_ms",
    "speedup",
    "efficiency",
)


@dataclass(frozen=True)
class BenchmarkRow:
    nodes: int
    corpus_size: int
    response_ms_mean: float
    response_ms_median: float
    response_ms_p95: float
    t_serial_ms: float
    speedup: float
    efficiency: float


@dataclass
class BenchmarkReport:
    config: dict
    rows: list[BenchmarkRow] = field(default_factory=list)
    missing: list[dict] = field(default_factory=list)


def compute_speedup(t_serial: float, t_parallel: float) -> float:
    """Serial execution time over parallel execution time."""
    if t_serial <= 0 or t_parallel <= 0:
        raise ValueError("times must be positive")
    return t_serial / t_parallel


def compute_efficiency(speedup: float, nodes: int) -> float:
    """Speedup divided by the number of nodes used."""
    if nodes < 1:
        raise ValueError("nodes must be >= 1")
    if speedup <= 0:
        raise ValueError("speedup must be positive")
    return speedup / nodes


def percentile_95(samples: list[float]) -> float:
    if not samples:
        raise ValueError("no samples")
    ordered = sorted(samples)
    rank = 0.95 * (len(ordered) - 1)
    lo = int(rank)
    hi = min(lo + 1, len(ordered) - 1)
    frac = rank - lo
    return ordered[lo] * (1 - frac) + ordered[hi] * frac


def generate_workload(
    seed: int,
    count: int,
    keyword_fraction: float = 0.7,
    top_k: int = 10,
) -> list[Query]:
    """Seeded query mix over the generator's vocabulary pools."""
    rng = random.Random(seed)
    kinds = ["keyword"] * round(count * keyword_fraction)
    kinds += ["multivariate"] * (count - len(kinds))
    rng.shuffle(kinds)
    queries = []
    for kind in kinds:
        if kind == "keyword":
            n_tokens = rng.randint(1, 3)
            tokens = []
            for _ in range(n_tokens):
                pool = rng.choice((TITLE_VOCAB, ABSTRACT_VOCAB, KEYWORD_VOCAB))
                # Zipf-ish emphasis on common stems, with a rare tail.
                limit = rng.choice((25, 100, len(pool)))
                tokens.append(pool[rng.randrange(min(limit, len(pool)))])
            queries.append(Query(kind="keyword", text=" ".join(tokens), top_k=top_k))
        else:
            constraints = []
            if rng.random() < 0.7:
                lo = rng.randint(YEAR_LO, YEAR_HI)
                hi = min(YEAR_HI, lo + rng.choice((0, 2, 5, 10, 30)))
                constraints.append(YearRange(lo=lo, hi=hi))
            if rng.random() < 0.6 or not constraints:
                venue_word = rng.choice(VENUE_POOL).split()[-1]
                constraints.append(FieldPredicate(field="venue", token=venue_word))
            if rng.random() < 0.4:
                constraints.append(
                    FieldPredicate(field="keywords", token=rng.choice(KEYWORD_VOCAB[:50]))
                )
            queries.append(Query(kind="multivariate", constraints=tuple(constraints), top_k=top_k))
    return queries


def ensure_corpus(config: BenchConfig) -> Path:
    """Generate the corpus unless a matching one is already in corpus_dir."""
    corpus_dir = Path(config.corpus_dir)
    manifest_path = corpus_dir / "manifest.json"
    if manifest_path.exists():
        manifest = load_manifest(manifest_path)
        if manifest.records == config.corpus_records and manifest.seed == config.corpus_seed:
            return manifest_path
        log.info("corpus at %s does not match config; regenerating", corpus_dir)
    log.info("generating %d-record corpus (seed %d)", config.corpus_records, config.corpus_seed)
    generate_corpus(config.corpus_records, config.corpus_seed, corpus_dir)
    return manifest_path


def _run_one_scale(
    config: BenchConfig, manifest_path: Path, n: int, workload: list[Query], workdir: Path
) -> list[float]:
    manifest = load_manifest(manifest_path)
    parts = partition_dataset(manifest, n)
    vo_ids = [f"vo{i + 1}" for i in range(config.vos)]
    workers = round_robin_workers([p.partition_id for p in parts], vo_ids)
    # Long heartbeat interval: liveness churn (a TCP connect per beat per
    # worker) is measurement noise here, and failure handling is not what
    # a scaling run exercises.
    spec = DeploymentSpec(
        manifest=manifest_path,
        vo_ids=vo_ids,
        workers=workers,
        task_timeout_s=config.task_timeout_s,
        startup_timeout_s=config.startup_timeout_s,
        heartbeat_interval_s=10.0,
    )
    deployment = LocalDeployment(spec, workdir / f"n{n}")
    samples: list[float] = []
    payloads = [query_to_payload(q) for q in workload]
    home = vo_ids[0]
    with deployment:
        endpoint = deployment.broker_endpoint(home)
        ids = wire.IdSource("bench")
        timeout = config.task_timeout_s + 30.0

        def run_pass(record: bool) -> None:
            for payload in payloads:
                env = wire.envelope(wire.SUBMIT_QUERY, ids.next(), wire.make_submit_query(payload))
                start = time.perf_counter()
                reply = transport.request(endpoint, env, timeout=timeout)
                elapsed_ms = (time.perf_counter() - start) * 1000.0
                if reply.type != wire.QUERY_RESULT:
                    raise RuntimeError(f"benchmark query got {reply.type}")
                if reply.payload["partial"]:
                    raise RuntimeError("benchmark query returned partial result")
                if record:
                    samples.append(elapsed_ms)

        run_pass(record=False)  # warm-up, excluded from statistics
        for _rep in range(config.repetitions):
            run_pass(record=True)
    return samples


def run_benchmark(config: BenchConfig, workdir: Path | None = None) -> BenchmarkReport:
    config.validate()
    manifest_path = ensure_corpus(config)
    workload = generate_workload(
        config.workload_seed, config.queries, config.keyword_fraction, config.top_k
    )
    workdir = Path(workdir) if workdir else Path(config.corpus_dir) / "bench-run"
    report = BenchmarkReport(
        config={
            "corpus_records": config.corpus_records,
            "corpus_seed": config.corpus_seed,
            "nodes": sorted(config.nodes),
            "vos": config.vos,
            "queries": config.queries,
            "workload_seed": config.workload_seed,
            "keyword_fraction": config.keyword_fraction,
            "top_k": config.top_k,
            "repetitions": config.repetitions,
        }
    )
    means: dict[int, float] = {}
    samples_by_n: dict[int, list[float]] = {}
    for n in sorted(set(config.nodes)):
        log.info("benchmark scale n=%d", n)
        try:
            samples = _run_one_scale(config, manifest_path, n, workload, workdir)
        except (RuntimeError, OSError) as exc:
            log.error("scale n=%d failed: %s", n, exc)
            report.missing.append({"nodes": n, "reason": str(exc)})
            continue
        samples_by_n[n] = samples
        means[n] = statistics.fmean(samples)
    if 1 not in means:
        return report  # no baseline, rows cannot be computed
    t_serial = means[1]
    for n in sorted(samples_by_n):
        mean = means[n]
        speedup = compute_speedup(t_serial, mean)
        report.rows.append(
            BenchmarkRow(
                nodes=n,
                corpus_size=config.corpus_records,
                response_ms_mean=mean,
                response_ms_median=statistics.median(samples_by_n[n]),
                response_ms_p95=percentile_95(samples_by_n[n]),
                t_serial_ms=t_serial,
                speedup=speedup,
                efficiency=compute_efficiency(speedup, n),
            )
        )
    return report


def emit_report(report: BenchmarkReport, path: Path, fmt: str = "csv") -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for row in report.rows:
            lines.append(",".join(str(getattr(row, col)) for col in CSV_COLUMNS))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif fmt == "json":
        obj = {
            "config": report.config,
            "rows": [
                {col: getattr(row, col) for col in CSV_COLUMNS} for row in report.rows
            ],
            "missing": report.missing,
        }
        path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def load_report_json(path: Path) -> BenchmarkReport:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return BenchmarkReport(
        config=obj["config"],
        rows=[BenchmarkRow(**row) for row in obj["rows"]],
        missing=obj.get("missing", []),
    )
