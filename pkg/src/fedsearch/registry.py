"""Broker-side node registry, liveness rule, and learned node throughput.

A node is online iff its last heartbeat (or registration) is younger than
offline_after * heartbeat_interval. Status is computed at read time from
an injectable clock, so the liveness rule is testable without sleeping.

Throughput learning: observed = records_scanned / elapsed_seconds,
blended as ewma_new = alpha * observed + (1 - alpha) * ewma_old; the
first sample initializes the average. Samples with nonpositive elapsed
are discarded and counted as anomalies.
"""
from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .corpus import DatasetPartition
from .errors import DuplicateNodeError
from .query import ScanStats

log = logging.getLogger(__name__)

STATUS_ONLINE = "online"
STATUS_OFFLINE = "offline"

DEFAULT_HEARTBEAT_INTERVAL = 2.0
DEFAULT_OFFLINE_AFTER = 3
DEFAULT_THROUGHPUT = 10_000.0
DEFAULT_EWMA_ALPHA = 0.3


@dataclass(frozen=True)
class NodeDescriptor:
    node_id: str
    endpoint: str
    vo_id: str
    status: str
    last_heartbeat: float

    def to_payload(self, partitions: list[str] | None = None) -> dict:
        return {
            "node_id": self.node_id,
            "endpoint": self.endpoint,
            "vo_id": self.vo_id,
            "status": self.status,
            "last_heartbeat": self.last_heartbeat,
            "partitions": partitions or [],
        }


class _Entry:
    __slots__ = ("node_id", "endpoint", "vo_id", "last_heartbeat", "partitions")

    def __init__(self, node_id, endpoint, vo_id, last_heartbeat, partitions):
        self.node_id = node_id
        self.endpoint = endpoint
        self.vo_id = vo_id
        self.last_heartbeat = last_heartbeat
        self.partitions = partitions


class NodeRegistry:
    """Tracks every worker of one VO plus the partitions it hosts."""

    def __init__(
        self,
        heartbeat_interval: float = DEFAULT_HEARTBEAT_INTERVAL,
        offline_after: int = DEFAULT_OFFLINE_AFTER,
        clock=time.time,
    ):
        self.heartbeat_interval = heartbeat_interval
        self.offline_after = offline_after
        self._clock = clock
        self._nodes: dict[str, _Entry] = {}
        self._lock = threading.Lock()

    def register(
        self,
        node_id: str,
        endpoint: str,
        vo_id: str,
        partitions: list[DatasetPartition],
    ) -> None:
        with self._lock:
            existing = self._nodes.get(node_id)
            if existing is not None and existing.endpoint != endpoint:
                raise DuplicateNodeError(
                    f"node {node_id!r} already registered at {existing.endpoint}, "
                    f"refusing {endpoint}"
                )
            self._nodes[node_id] = _Entry(
                node_id, endpoint, vo_id, self._clock(), list(partitions)
            )

    def heartbeat(self, node_id: str) -> bool:
        with self._lock:
            entry = self._nodes.get(node_id)
            if entry is None:
                return False
            entry.last_heartbeat = self._clock()
            return True

    def deregister(self, node_id: str) -> None:
        with self._lock:
            self._nodes.pop(node_id, None)

    def _status(self, entry: _Entry, now: float) -> str:
        limit = self.heartbeat_interval * self.offline_after
        return STATUS_ONLINE if (now - entry.last_heartbeat) < limit else STATUS_OFFLINE

    def snapshot(self) -> list[NodeDescriptor]:
        now = self._clock()
        with self._lock:
            return [
                NodeDescriptor(
                    node_id=e.node_id,
                    endpoint=e.endpoint,
                    vo_id=e.vo_id,
                    status=self._status(e, now),
                    last_heartbeat=e.last_heartbeat,
                )
                for e in sorted(self._nodes.values(), key=lambda e: e.node_id)
            ]

    def snapshot_payload(self) -> list[dict]:
        now = self._clock()
        with self._lock:
            return [
                NodeDescriptor(
                    node_id=e.node_id,
                    endpoint=e.endpoint,
                    vo_id=e.vo_id,
                    status=self._status(e, now),
                    last_heartbeat=e.last_heartbeat,
                ).to_payload(sorted(p.partition_id for p in e.partitions))
                for e in sorted(self._nodes.values(), key=lambda e: e.node_id)
            ]

    def endpoint_of(self, node_id: str) -> str | None:
        with self._lock:
            entry = self._nodes.get(node_id)
            return entry.endpoint if entry else None

    def locate_data_sources(self) -> list[tuple[DatasetPartition, list[str]]]:
        """Every known partition with its currently online hosts, id order."""
        now = self._clock()
        with self._lock:
            by_partition: dict[str, tuple[DatasetPartition, list[str]]] = {}
            for entry in self._nodes.values():
                online = self._status(entry, now) == STATUS_ONLINE
                for part in entry.partitions:
                    slot = by_partition.setdefault(part.partition_id, (part, []))
                    if online:
                        slot[1].append(entry.node_id)
            return [
                (part, sorted(hosts))
                for _pid, (part, hosts) in sorted(by_partition.items())
            ]


@dataclass(frozen=True)
class PerformanceRecord:
    node_id: str
    ewma_throughput: float
    sample_count: int


class PerformanceTable:
    """Per-node scan throughput (records/second), EWMA-smoothed, persisted."""

    def __init__(
        self,
        alpha: float = DEFAULT_EWMA_ALPHA,
        store_path: Path | None = None,
    ):
        self.alpha = alpha
        self._store_path = Path(store_path) if store_path else None
        self._records: dict[str, PerformanceRecord] = {}
        self.anomalies = 0
        self._lock = threading.Lock()
        if self._store_path is not None and self._store_path.exists():
            self._load()

    def record(self, node_id: str, stats: ScanStats) -> PerformanceRecord | None:
        if stats.elapsed_ms <= 0:
            with self._lock:
                self.anomalies += 1
            log.warning("discarding anomalous sample for %s: elapsed=%sms", node_id, stats.elapsed_ms)
            return None
        if stats.records_scanned == 0:
            # Empty partitions carry no throughput information.
            return self.get(node_id)
        observed = stats.records_scanned / (stats.elapsed_ms / 1000.0)
        with self._lock:
            old = self._records.get(node_id)
            if old is None:
                updated = PerformanceRecord(node_id, observed, 1)
            else:
                blended = self.alpha * observed + (1.0 - self.alpha) * old.ewma_throughput
                updated = PerformanceRecord(node_id, blended, old.sample_count + 1)
            self._records[node_id] = updated
            self._save_locked()
            return updated

    def get(self, node_id: str) -> PerformanceRecord | None:
        with self._lock:
            return self._records.get(node_id)

    def throughput(self, node_id: str, default: float = DEFAULT_THROUGHPUT) -> float:
        rec = self.get(node_id)
        return rec.ewma_throughput if rec else default

    def snapshot(self) -> dict[str, PerformanceRecord]:
        with self._lock:
            return dict(self._records)

    def _save_locked(self) -> None:
        if self._store_path is None:
            return
        obj = {
            node_id: {"ewma_throughput": r.ewma_throughput, "sample_count": r.sample_count}
            for node_id, r in sorted(self._records.items())
        }
        tmp = self._store_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
        tmp.replace(self._store_path)

    def _load(self) -> None:
        try:
            obj = json.loads(self._store_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            log.warning("ignoring unreadable performance store %s: %s", self._store_path, exc)
            return
        for node_id, rec in obj.items():
            self._records[node_id] = PerformanceRecord(
                node_id, rec["ewma_throughput"], rec["sample_count"]
            )
