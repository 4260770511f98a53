"""Long-lived per-node search service.

Loads its partitions once (digest-checked), registers with the VO broker
(capped exponential backoff until the broker answers), heartbeats on the
configured interval, and answers SearchTask messages until told to stop.
Tasks on different connections execute concurrently; partitions are
immutable so no task shares mutable state.
"""
from __future__ import annotations

import logging
import threading
import time

from . import transport, wire
from .config import WorkerConfig
from .corpus import load_manifest, load_partition
from .errors import CorpusError, FedSearchError, ProtocolError
from .query import hit_to_payload, query_from_payload, stats_to_payload
from .scan import PartitionSearcher

log = logging.getLogger(__name__)


def backoff_delays(initial: float = 1.0, factor: float = 2.0, cap: float = 30.0):
    """1s, 2s, 4s, ... capped; the registration retry schedule."""
    delay = initial
    while True:
        yield min(delay, cap)
        delay = min(delay * factor, cap)


class RegistrationRejected(FedSearchError):
    """Broker refused this node_id; retrying cannot help."""


class SearchWorker:
    def __init__(self, config: WorkerConfig):
        self.config = config
        self._ids = wire.IdSource(f"wk-{config.node_id}")
        self._searchers: dict[str, PartitionSearcher] = {}
        self._partition_payloads: list[dict] = []
        self._server = None
        self._server_thread = None
        self._heartbeat_thread = None
        self._stop = threading.Event()
        self._load_partitions()

    def _load_partitions(self) -> None:
        manifest = load_manifest(self.config.manifest)
        by_id = {p.partition_id: p for p in manifest.partitions}
        for pid in self.config.partitions:
            if pid not in by_id:
                raise CorpusError(f"manifest has no partition {pid!r}")
            part = by_id[pid]
            records = load_partition(part, base_dir=manifest.base_dir())
            self._searchers[pid] = PartitionSearcher(pid, records)
            self._partition_payloads.append(part.to_payload())
            log.info("loaded partition %s (%d records)", pid, len(records))

    # ------------------------------------------------------------------

    def start(self) -> None:
        """Bind the task server; raises OSError if the port is taken."""
        self._server, self._server_thread = transport.start_server(
            self.config.host, self.config.port, self._handle_envelope
        )
        log.info("worker %s listening on %s", self.config.node_id, self.config.endpoint)

    def register(self) -> None:
        """Register with the broker, retrying with capped backoff."""
        delays = backoff_delays(
            self.config.register_backoff_initial_s,
            cap=self.config.register_backoff_cap_s,
        )
        while not self._stop.is_set():
            env = wire.envelope(
                wire.REGISTER,
                self._ids.next(),
                wire.make_register(
                    self.config.node_id,
                    self.config.endpoint,
                    self.config.vo_id,
                    self._partition_payloads,
                ),
            )
            try:
                reply = transport.request(self.config.broker, env, timeout=10.0)
            except (OSError, ProtocolError) as exc:
                delay = next(delays)
                log.warning("broker %s unreachable (%s); retrying in %.1fs", self.config.broker, exc, delay)
                if self._stop.wait(delay):
                    return
                continue
            if reply.type == wire.REGISTER_ACK and reply.payload.get("accepted"):
                log.info("registered with broker %s", self.config.broker)
                return
            raise RegistrationRejected(str(reply.payload.get("reason", "rejected")))

    def start_heartbeats(self) -> None:
        self._heartbeat_thread = threading.Thread(
            target=self._heartbeat_loop, daemon=True, name="heartbeat"
        )
        self._heartbeat_thread.start()

    def _heartbeat_loop(self) -> None:
        while not self._stop.wait(self.config.heartbeat_interval_s):
            env = wire.envelope(
                wire.HEARTBEAT, self._ids.next(), wire.make_heartbeat(self.config.node_id)
            )
            try:
                transport.notify(self.config.broker, env, timeout=5.0)
            except OSError as exc:
                log.warning("heartbeat to %s failed: %s", self.config.broker, exc)

    def stop(self) -> None:
        """Finish in-flight tasks, deregister, release the port."""
        self._stop.set()
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()  # joins in-flight handler threads
            self._server_thread.join(timeout=10)
            self._server = None
        env = wire.envelope(
            wire.DEREGISTER, self._ids.next(), wire.make_deregister(self.config.node_id)
        )
        try:
            transport.notify(self.config.broker, env, timeout=5.0)
        except OSError:
            pass
        log.info("worker %s stopped", self.config.node_id)

    def run_forever(self) -> None:
        """start + register + heartbeat, then park until stop() is called."""
        self.start()
        self.register()
        self.start_heartbeats()
        while not self._stop.wait(0.5):
            pass

    # ------------------------------------------------------------------

    def _handle_envelope(self, env: wire.Envelope) -> wire.Envelope | None:
        if env.type != wire.SEARCH_TASK:
            raise ProtocolError(f"worker cannot handle {env.type}")
        p = env.payload
        job_id, task_id = p["job_id"], p["task_id"]
        searcher = self._searchers.get(p["partition"]["partition_id"])
        if searcher is None:
            return wire.envelope(
                wire.SEARCH_TASK_ERROR,
                env.id,
                wire.make_search_task_error(
                    job_id, task_id, f"partition {p['partition']['partition_id']!r} not hosted here"
                ),
            )
        if self.config.task_delay_ms:
            time.sleep(self.config.task_delay_ms / 1000.0)
        try:
            query = query_from_payload(p["query"])
            hits, stats = searcher.search(query)
        except FedSearchError as exc:
            return wire.envelope(
                wire.SEARCH_TASK_ERROR,
                env.id,
                wire.make_search_task_error(job_id, task_id, str(exc)),
            )
        return wire.envelope(
            wire.SEARCH_TASK_RESULT,
            env.id,
            wire.make_search_task_result(
                job_id, task_id, [hit_to_payload(h) for h in hits], stats_to_payload(stats)
            ),
        )
