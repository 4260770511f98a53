"""Single entry point: corpus generation, services, queries, benchmarks.

Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 query answered
with the partial flag set. stdout carries data; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import signal
import sys
from pathlib import Path

from . import transport, wire
from .config import load_bench_config, load_broker_config, load_worker_config
from .corpus import generate_corpus, load_manifest, partition_dataset
from .errors import FedSearchError, InvalidQueryError
from .query import (
    FieldPredicate,
    Query,
    YearRange,
    hit_from_payload,
    query_to_payload,
    validate_query,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_PARTIAL = 3

log = logging.getLogger("fedsearch")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="fedsearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded synthetic corpus")
    p.add_argument("--records", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--partitions", type=int, default=None)

    p = sub.add_parser("worker", help="run a search service node")
    p.add_argument("--config", type=Path, required=True)

    p = sub.add_parser("broker", help="run a VO broker (wire endpoint + HTTP gateway)")
    p.add_argument("--config", type=Path, required=True)

    p = sub.add_parser("search", help="submit a query to a broker")
    p.add_argument("--broker", required=True, help="broker wire endpoint host:port")
    p.add_argument("--keyword", default=None, help="keyword query text")
    p.add_argument(
        "--where",
        action="append",
        default=[],
        metavar="FIELD=VALUE",
        help="field predicate (title/authors/keywords/venue); repeatable",
    )
    p.add_argument("--year", default=None, metavar="LO..HI", help="inclusive year range")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--json", action="store_true", help="print the wire payload verbatim")

    p = sub.add_parser("status", help="print a job description snapshot")
    p.add_argument("--broker", required=True)
    p.add_argument("--job", required=True)

    p = sub.add_parser("bench", help="run the scaling benchmark")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="report path (.csv or .json)")

    return parser


def _cmd_gen(args) -> int:
    manifest = generate_corpus(args.records, args.seed, args.out)
    if args.partitions is not None:
        if args.partitions < 1:
            raise _UsageError("--partitions must be >= 1")
        partition_dataset(manifest, args.partitions)
        manifest = load_manifest(Path(args.out) / "manifest.json")
    print(json.dumps(
        {
            "manifest": str(Path(args.out) / "manifest.json"),
            "records": manifest.records,
            "partitions": [p.partition_id for p in manifest.partitions],
        },
        indent=2,
    ))
    return EXIT_OK


def _cmd_worker(args) -> int:
    from .worker import RegistrationRejected, SearchWorker

    config = load_worker_config(args.config)
    worker = SearchWorker(config)
    _install_stop_handler(worker.stop)
    try:
        worker.run_forever()
    except OSError as exc:
        log.error("cannot bind %s: %s", config.endpoint, exc)
        return EXIT_RUNTIME
    except RegistrationRejected as exc:
        log.error("registration rejected: %s", exc)
        worker.stop()
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_broker(args) -> int:
    import threading

    from .broker import Broker

    config = load_broker_config(args.config)
    broker = Broker(config)
    stop = threading.Event()
    _install_stop_handler(stop.set)
    try:
        broker.start()
    except OSError as exc:
        log.error("cannot bind %s / %s: %s", config.endpoint, config.http_endpoint, exc)
        return EXIT_RUNTIME
    stop.wait()
    broker.stop()
    return EXIT_OK


def _install_stop_handler(callback) -> None:
    def _handler(_signum, _frame):
        callback()

    signal.signal(signal.SIGTERM, _handler)
    signal.signal(signal.SIGINT, _handler)


def build_query(keyword: str | None, where: list[str], year: str | None, top_k: int) -> Query:
    """Shared query construction for CLI flags; raises on invalid input."""
    constraints = []
    for item in where:
        field, sep, value = item.partition("=")
        if not sep or not field or not value:
            raise InvalidQueryError(f"--where needs FIELD=VALUE, got {item!r}")
        constraints.append(FieldPredicate(field=field, token=value))
    if year is not None:
        lo, sep, hi = year.partition("..")
        try:
            constraints.append(YearRange(lo=int(lo), hi=int(hi if sep else lo)))
        except ValueError as exc:
            raise InvalidQueryError(f"--year needs LO..HI integers, got {year!r}") from exc
    if keyword is not None and constraints:
        raise InvalidQueryError("--keyword and --where/--year are mutually exclusive")
    if keyword is not None:
        query = Query(kind="keyword", text=keyword, top_k=top_k)
    elif constraints:
        query = Query(kind="multivariate", constraints=tuple(constraints), top_k=top_k)
    else:
        raise InvalidQueryError("need --keyword or at least one --where/--year")
    validate_query(query)
    return query


def _cmd_search(args) -> int:
    try:
        query = build_query(args.keyword, args.where, args.year, args.top_k)
    except InvalidQueryError as exc:
        raise _UsageError(str(exc)) from exc
    env = wire.envelope(wire.SUBMIT_QUERY, "cli-1", wire.make_submit_query(query_to_payload(query)))
    reply = transport.request(args.broker, env, timeout=120.0)
    if reply.type != wire.QUERY_RESULT:
        log.error("unexpected reply %s", reply.type)
        return EXIT_RUNTIME
    payload = reply.payload
    if args.json:
        print(wire.dumps_canonical(payload))
    else:
        hits = [hit_from_payload(h) for h in payload["hits"]]
        print(f"job {payload['job_id']}  hits {len(hits)}" + ("  PARTIAL" if payload["partial"] else ""))
        if hits:
            print(f"{'score':>6}  {'id':>8}  {'year':>4}  {'partition':<10}  title")
            for h in hits:
                print(f"{h.score:>6}  {h.record_id:>8}  {h.year:>4}  {h.partition_id:<10}  {h.title}")
    return EXIT_PARTIAL if payload["partial"] else EXIT_OK


def _cmd_status(args) -> int:
    env = wire.envelope(wire.STATUS_REQUEST, "cli-1", wire.make_status_request(args.job))
    reply = transport.request(args.broker, env, timeout=30.0)
    if reply.type != wire.STATUS_RESPONSE:
        log.error("unexpected reply %s", reply.type)
        return EXIT_RUNTIME
    if not reply.payload["found"]:
        log.error("job %s not found", args.job)
        return EXIT_RUNTIME
    print(json.dumps(reply.payload["jdf"], indent=2))
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .bench import emit_report, run_benchmark

    config = load_bench_config(args.config)
    report = run_benchmark(config)
    fmt = "json" if str(args.out).endswith(".json") else "csv"
    emit_report(report, args.out, fmt)
    for row in report.rows:
        print(
            f"n={row.nodes}  mean={row.response_ms_mean:.1f}ms  "
            f"median={row.response_ms_median:.1f}ms  p95={row.response_ms_p95:.1f}ms  "
            f"speedup={row.speedup:.3f}  efficiency={row.efficiency:.3f}"
        )
    for miss in report.missing:
        print(f"n={miss['nodes']}  SKIPPED: {miss['reason']}")
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "worker": _cmd_worker,
    "broker": _cmd_broker,
    "search": _cmd_search,
    "status": _cmd_status,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FedSearchError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
