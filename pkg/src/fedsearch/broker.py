"""The per-VO head node: registry, data locator, planner, job manager.

One broker process serves two listeners:

  * the wire endpoint, for workers (register/heartbeat/deregister), peer
    brokers (PeerQuery), and CLI clients (SubmitQuery, StatusRequest);
  * an HTTP/JSON gateway for browser clients, whose response bodies
    mirror the wire payloads field for field.

A submitted query runs as a job: locate partitions, plan with learned
throughput, persist the job description, dispatch tasks concurrently,
merge, and record per-node performance. Peer brokers are queried
single-hop in parallel with the local job; a silent peer only degrades
the response to partial, never fails it.
"""
from __future__ import annotations

import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import transport, wire
from .config import BrokerConfig
from .corpus import DatasetPartition
from .errors import (
    DuplicateNodeError,
    InvalidQueryError,
    JobNotFoundError,
    ProtocolError,
)
from .jobs import (
    OUTCOME_FAILED,
    OUTCOME_OK,
    STATUS_DISPATCHED,
    STATUS_DONE,
    STATUS_FAILED,
    STATUS_MERGING,
    STATUS_PARTIAL,
    JobDescription,
    JobStore,
    TaskRecord,
    timestamp_utc,
)
from .planner import build_plan
from .query import (
    Hit,
    Query,
    hit_from_payload,
    hit_to_payload,
    query_to_payload,
    stats_from_payload,
    validate_query,
)
from .registry import NodeRegistry, PerformanceTable

log = logging.getLogger(__name__)


def merge_results(partials: list[list[Hit]], top_k: int) -> list[Hit]:
    """Concatenate, order by (score desc, record_id asc), truncate.

    Invariant under permutation of the partials; inputs come from
    disjoint partitions so record ids never collide.
    """
    merged = [h for hits in partials for h in hits]
    merged.sort(key=lambda h: (-h.score, h.record_id))
    return merged[:top_k]


class Broker:
    def __init__(self, config: BrokerConfig, clock=time.time):
        self.config = config
        state_dir = Path(config.state_dir)
        state_dir.mkdir(parents=True, exist_ok=True)
        self.registry = NodeRegistry(
            heartbeat_interval=config.heartbeat_interval_s,
            offline_after=config.offline_after,
            clock=clock,
        )
        self.performance = PerformanceTable(
            alpha=config.ewma_alpha,
            store_path=state_dir / "performance.json",
        )
        self.jobs = JobStore(state_dir / "jobs")
        self._ids = wire.IdSource(f"bk-{config.vo_id}")
        self._server = None
        self._server_thread = None
        self._http = None
        self._http_thread = None

    # ------------------------------------------------------------------
    # lifecycle

    def start(self) -> None:
        self._server, self._server_thread = transport.start_server(
            self.config.host, self.config.port, self._handle_envelope
        )
        self._http = _GatewayServer((self.config.host, self.config.http_port), self)
        self._http_thread = threading.Thread(
            target=self._http.serve_forever, daemon=True, name="gateway"
        )
        self._http_thread.start()
        log.info(
            "broker %s up: wire %s, http %s",
            self.config.vo_id,
            self.config.endpoint,
            self.config.http_endpoint,
        )

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server_thread.join(timeout=10)
        if self._http is not None:
            self._http.shutdown()
            self._http.server_close()
            self._http_thread.join(timeout=10)

    # ------------------------------------------------------------------
    # wire message handling

    def _handle_envelope(self, env: wire.Envelope) -> wire.Envelope | None:
        if env.type == wire.REGISTER:
            return self._on_register(env)
        if env.type == wire.HEARTBEAT:
            self.registry.heartbeat(env.payload["node_id"])
            return None
        if env.type == wire.DEREGISTER:
            self.registry.deregister(env.payload["node_id"])
            return None
        if env.type == wire.SUBMIT_QUERY:
            query = self._parse_query(env.payload)
            job_id, hits, partial = self.submit_query(query)
            return wire.envelope(
                wire.QUERY_RESULT,
                env.id,
                wire.make_query_result(job_id, [hit_to_payload(h) for h in hits], partial),
            )
        if env.type == wire.PEER_QUERY:
            if env.payload.get("hop") != 1:
                raise ProtocolError(f"peer query with hop={env.payload.get('hop')!r}")
            query = self._parse_query(env.payload)
            _jdf, hits, _partial = self.run_local_job(query)
            return wire.envelope(
                wire.PEER_RESULT,
                env.id,
                wire.make_peer_result([hit_to_payload(h) for h in hits], self.config.vo_id),
            )
        if env.type == wire.STATUS_REQUEST:
            return wire.envelope(
                wire.STATUS_RESPONSE, env.id, self.job_status(env.payload["job_id"])
            )
        raise ProtocolError(f"broker cannot handle {env.type}")

    @staticmethod
    def _parse_query(payload: dict) -> Query:
        from .query import query_from_payload

        query = query_from_payload(payload["query"])
        validate_query(query)
        return query

    def _on_register(self, env: wire.Envelope) -> wire.Envelope:
        p = env.payload
        partitions = [DatasetPartition.from_payload(obj) for obj in p["partitions"]]
        try:
            self.registry.register(p["node_id"], p["endpoint"], p["vo_id"], partitions)
        except DuplicateNodeError as exc:
            ack = wire.make_register_ack(p["node_id"], False, str(exc))
        else:
            log.info("registered %s at %s (%d partitions)", p["node_id"], p["endpoint"], len(partitions))
            ack = wire.make_register_ack(p["node_id"], True, None)
        return wire.envelope(wire.REGISTER_ACK, env.id, ack)

    # ------------------------------------------------------------------
    # job execution

    def job_status(self, job_id: str) -> dict:
        try:
            jdf = self.jobs.load(job_id)
        except JobNotFoundError:
            return wire.make_status_response(False, None)
        return wire.make_status_response(True, jdf.to_payload())

    def create_jdf(self, plan, query: Query) -> JobDescription:
        tasks = []
        for i, (node_id, partition_id) in enumerate(plan.assignments):
            endpoint = self.registry.endpoint_of(node_id)
            tasks.append(
                TaskRecord(
                    task_id=f"t{i}",
                    node_id=node_id,
                    endpoint=endpoint or "",
                    partition_id=partition_id,
                )
            )
        jdf = JobDescription(
            job_id=plan.job_id,
            query=query,
            tasks=tasks,
            result_sink=self.config.endpoint,
            created_at=timestamp_utc(),
        )
        self.jobs.save(jdf)
        return jdf

    def run_local_job(self, query: Query) -> tuple[JobDescription, list[Hit], bool]:
        """Plan, dispatch, and merge over this VO only."""
        located = self.registry.locate_data_sources()
        plannable = [(part, hosts) for part, hosts in located if hosts]
        dropped = [part.partition_id for part, hosts in located if not hosts]
        if dropped:
            log.warning("partitions with no online host, skipping: %s", dropped)
        plan = build_plan(
            plannable,
            self.performance.throughput,
            default_throughput=self.config.default_throughput,
        )
        jdf = self.create_jdf(plan, query)
        partition_map = {part.partition_id: part for part, _hosts in located}
        partials = self.dispatch(jdf, partition_map)
        hits = merge_results(partials, query.top_k)
        partial = bool(dropped) or jdf.status != STATUS_DONE
        return jdf, hits, partial

    def dispatch(
        self, jdf: JobDescription, partition_map: dict[str, DatasetPartition]
    ) -> list[list[Hit]]:
        """Send every task concurrently; one replica retry per failed task."""
        self.jobs.transition(jdf, STATUS_DISPATCHED)
        partials: list[list[Hit]] = []
        if jdf.tasks:
            with ThreadPoolExecutor(max_workers=len(jdf.tasks)) as pool:
                results = list(
                    pool.map(lambda t: self._run_task(jdf, t, partition_map), jdf.tasks)
                )
            partials = [hits for hits in results if hits is not None]
        self.jobs.transition(jdf, STATUS_MERGING)
        ok = sum(1 for t in jdf.tasks if t.outcome == OUTCOME_OK)
        if not jdf.tasks:
            final = STATUS_DONE
        elif ok == 0:
            final = STATUS_FAILED
        elif ok < len(jdf.tasks):
            final = STATUS_PARTIAL
        else:
            final = STATUS_DONE
        self.jobs.transition(jdf, final)
        return partials

    def _run_task(
        self,
        jdf: JobDescription,
        task: TaskRecord,
        partition_map: dict[str, DatasetPartition],
    ) -> list[Hit] | None:
        partition = partition_map[task.partition_id]
        query_payload = query_to_payload(jdf.query)
        attempts: list[tuple[str, str]] = [(task.node_id, task.endpoint)]
        last_error = "no attempt made"
        attempt_no = 0
        while attempts:
            node_id, endpoint = attempts.pop(0)
            attempt_no += 1
            task.attempts = attempt_no
            task.node_id = node_id
            task.endpoint = endpoint
            env = wire.envelope(
                wire.SEARCH_TASK,
                self._ids.next(),
                wire.make_search_task(
                    jdf.job_id,
                    task.task_id,
                    query_payload,
                    partition.to_payload(),
                    jdf.query.top_k,
                ),
            )
            failed = False
            try:
                reply = transport.request(endpoint, env, timeout=self.config.task_timeout_s)
            except (OSError, ProtocolError) as exc:
                last_error = f"{endpoint}: {exc}"
                failed = True
            else:
                if reply.type == wire.SEARCH_TASK_RESULT:
                    task.outcome = OUTCOME_OK
                    task.error = None
                    task.stats = stats_from_payload(reply.payload["scan_stats"])
                    self.performance.record(node_id, task.stats)
                    return [hit_from_payload(h) for h in reply.payload["hits"]]
                if reply.type == wire.SEARCH_TASK_ERROR:
                    last_error = reply.payload.get("reason", "task error")
                else:
                    last_error = f"unexpected reply type {reply.type}"
                failed = True
            log.warning("task %s attempt %d failed: %s", task.task_id, attempt_no, last_error)
            if failed and attempt_no == 1:
                # One retry, on a replica host that is online right now.
                alternate = self._alternate_host(task.partition_id, node_id)
                if alternate is not None:
                    attempts.append(alternate)
        task.outcome = OUTCOME_FAILED
        task.error = last_error
        return None

    def _alternate_host(self, partition_id: str, exclude_node: str) -> tuple[str, str] | None:
        for part, hosts in self.registry.locate_data_sources():
            if part.partition_id != partition_id:
                continue
            for host in hosts:
                if host != exclude_node:
                    endpoint = self.registry.endpoint_of(host)
                    if endpoint:
                        return host, endpoint
        return None

    # ------------------------------------------------------------------
    # federation

    def submit_query(self, query: Query) -> tuple[str, list[Hit], bool]:
        """Local job plus single-hop peer fan-out, merged."""
        peer_pool = None
        peer_futures = []
        if self.config.peers:
            peer_pool = ThreadPoolExecutor(max_workers=len(self.config.peers))
            peer_futures = [
                peer_pool.submit(self._query_peer, peer, query) for peer in self.config.peers
            ]
        jdf, local_hits, partial = self.run_local_job(query)
        partials = [local_hits]
        for fut in peer_futures:
            peer_hits = fut.result()
            if peer_hits is None:
                partial = True
            else:
                partials.append(peer_hits)
        if peer_pool is not None:
            peer_pool.shutdown(wait=False)
        hits = merge_results(partials, query.top_k)
        return jdf.job_id, hits, partial

    def _query_peer(self, peer_endpoint: str, query: Query) -> list[Hit] | None:
        env = wire.envelope(
            wire.PEER_QUERY,
            self._ids.next(),
            wire.make_peer_query(query_to_payload(query), self.config.vo_id),
        )
        try:
            reply = transport.request(peer_endpoint, env, timeout=self.config.peer_timeout_s)
        except (OSError, ProtocolError) as exc:
            log.warning("peer %s unavailable: %s", peer_endpoint, exc)
            return None
        if reply.type != wire.PEER_RESULT:
            log.warning("peer %s replied %s", peer_endpoint, reply.type)
            return None
        return [hit_from_payload(h) for h in reply.payload["hits"]]


# ----------------------------------------------------------------------
# HTTP gateway


class _GatewayServer(ThreadingHTTPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, addr, broker: Broker):
        self.broker = broker
        super().__init__(addr, _GatewayHandler)


class _GatewayHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        log.debug("gateway: " + fmt, *args)

    def _send_json(self, status: int, payload) -> None:
        body = wire.dumps_canonical(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        broker = self.server.broker
        if self.path == "/health":
            self._send_json(200, {"status": "ok", "vo_id": broker.config.vo_id})
        elif self.path == "/nodes":
            self._send_json(
                200,
                {"vo_id": broker.config.vo_id, "nodes": broker.registry.snapshot_payload()},
            )
        elif self.path.startswith("/jobs/"):
            job_id = self.path[len("/jobs/") :]
            response = broker.job_status(job_id)
            if response["found"]:
                self._send_json(200, response)
            else:
                self._send_json(404, response)
        else:
            self._send_json(404, {"error": f"no route {self.path}"})

    def do_POST(self):
        broker = self.server.broker
        if self.path != "/query":
            self._send_json(404, {"error": f"no route {self.path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            payload = json.loads(raw)
            query = Broker._parse_query({"query": payload})
        except (ValueError, KeyError, InvalidQueryError) as exc:
            self._send_json(400, {"error": str(exc)})
            return
        job_id, hits, partial = broker.submit_query(query)
        self._send_json(
            200, wire.make_query_result(job_id, [hit_to_payload(h) for h in hits], partial)
        )
