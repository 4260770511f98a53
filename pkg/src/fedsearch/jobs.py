"""Job descriptions, their status machine, and the file-backed job store.

Each job is one JSON document under the store directory, rewritten
atomically on every status transition, with an append-only status log
alongside (<job_id>.log, one line per transition). Status moves only
along created -> dispatched -> merging -> {done, partial, failed}.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import InvalidTransitionError, JobNotFoundError
from .query import (
    Query,
    ScanStats,
    query_from_payload,
    query_to_payload,
    stats_from_payload,
    stats_to_payload,
)

STATUS_CREATED = "created"
STATUS_DISPATCHED = "dispatched"
STATUS_MERGING = "merging"
STATUS_DONE = "done"
STATUS_PARTIAL = "partial"
STATUS_FAILED = "failed"

TRANSITIONS = {
    STATUS_CREATED: {STATUS_DISPATCHED},
    STATUS_DISPATCHED: {STATUS_MERGING},
    STATUS_MERGING: {STATUS_DONE, STATUS_PARTIAL, STATUS_FAILED},
    STATUS_DONE: set(),
    STATUS_PARTIAL: set(),
    STATUS_FAILED: set(),
}

OUTCOME_PENDING = "pending"
OUTCOME_OK = "ok"
OUTCOME_FAILED = "failed"


def timestamp_utc(epoch: float | None = None) -> str:
    dt = datetime.fromtimestamp(epoch if epoch is not None else time.time(), tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


@dataclass
class TaskRecord:
    task_id: str
    node_id: str
    endpoint: str
    partition_id: str
    outcome: str = OUTCOME_PENDING
    error: str | None = None
    attempts: int = 0
    stats: ScanStats | None = None

    def to_payload(self) -> dict:
        return {
            "task_id": self.task_id,
            "node_id": self.node_id,
            "endpoint": self.endpoint,
            "partition_id": self.partition_id,
            "outcome": self.outcome,
            "error": self.error,
            "attempts": self.attempts,
            "stats": stats_to_payload(self.stats) if self.stats else None,
        }

    @classmethod
    def from_payload(cls, obj: dict) -> "TaskRecord":
        return cls(
            task_id=obj["task_id"],
            node_id=obj["node_id"],
            endpoint=obj["endpoint"],
            partition_id=obj["partition_id"],
            outcome=obj["outcome"],
            error=obj["error"],
            attempts=obj["attempts"],
            stats=stats_from_payload(obj["stats"]) if obj["stats"] else None,
        )


@dataclass
class JobDescription:
    job_id: str
    query: Query
    tasks: list[TaskRecord]
    result_sink: str
    created_at: str
    status: str = STATUS_CREATED

    def to_payload(self) -> dict:
        return {
            "job_id": self.job_id,
            "query": query_to_payload(self.query),
            "tasks": [t.to_payload() for t in self.tasks],
            "result_sink": self.result_sink,
            "created_at": self.created_at,
            "status": self.status,
        }

    @classmethod
    def from_payload(cls, obj: dict) -> "JobDescription":
        return cls(
            job_id=obj["job_id"],
            query=query_from_payload(obj["query"]),
            tasks=[TaskRecord.from_payload(t) for t in obj["tasks"]],
            result_sink=obj["result_sink"],
            created_at=obj["created_at"],
            status=obj["status"],
        )


class JobStore:
    """One JSON file per job plus an append-only status log."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _doc_path(self, job_id: str) -> Path:
        return self.directory / f"{job_id}.json"

    def _log_path(self, job_id: str) -> Path:
        return self.directory / f"{job_id}.log"

    def save(self, jdf: JobDescription) -> None:
        with self._lock:
            tmp = self._doc_path(jdf.job_id).with_suffix(".tmp")
            tmp.write_text(json.dumps(jdf.to_payload(), indent=2) + "\n", encoding="utf-8")
            tmp.replace(self._doc_path(jdf.job_id))

    def transition(self, jdf: JobDescription, new_status: str) -> None:
        if new_status not in TRANSITIONS.get(jdf.status, set()):
            raise InvalidTransitionError(f"{jdf.status} -> {new_status} is not allowed")
        jdf.status = new_status
        self.save(jdf)
        with self._lock:
            with open(self._log_path(jdf.job_id), "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"ts": timestamp_utc(), "status": new_status}) + "\n")

    def load(self, job_id: str) -> JobDescription:
        path = self._doc_path(job_id)
        if not path.exists():
            raise JobNotFoundError(f"no job {job_id!r}")
        with self._lock:
            obj = json.loads(path.read_text(encoding="utf-8"))
        return JobDescription.from_payload(obj)

    def exists(self, job_id: str) -> bool:
        return self._doc_path(job_id).exists()
