"""Config files for workers, brokers, and the benchmark harness.

All three are JSON documents; the keys are documented in the README and
mirror the dataclass fields below. Unknown keys are rejected so typos
fail loudly at startup.
"""
from __future__ import annotations

import json
from dataclasses import MISSING, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError


def _load_json(path: Path) -> dict:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return obj


def _build(cls, obj: dict, path: Path):
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(obj) - names)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    required = {
        f.name
        for f in fields(cls)
        if f.default is MISSING and f.default_factory is MISSING
    }
    missing = sorted(required - set(obj))
    if missing:
        raise ConfigError(f"{path}: missing required keys {missing}")
    return cls(**obj)


@dataclass
class WorkerConfig:
    node_id: str
    vo_id: str
    host: str
    port: int
    broker: str  # broker wire endpoint, host:port
    manifest: str  # path to the corpus manifest
    partitions: list[str] = field(default_factory=list)  # hosted partition ids
    heartbeat_interval_s: float = 2.0
    register_backoff_initial_s: float = 1.0
    register_backoff_cap_s: float = 30.0
    task_delay_ms: int = 0  # artificial per-task delay, for fault drills

    @property
    def endpoint(self) -> str:
        return f"{self.host}:{self.port}"


@dataclass
class BrokerConfig:
    vo_id: str
    host: str
    port: int
    http_port: int
    state_dir: str
    peers: list[str] = field(default_factory=list)  # peer broker wire endpoints
    heartbeat_interval_s: float = 2.0
    offline_after: int = 3
    task_timeout_s: float = 30.0
    peer_timeout_s: float = 30.0
    default_throughput: float = 10_000.0
    ewma_alpha: float = 0.3

    @property
    def endpoint(self) -> str:
        return f"{self.host}:{self.port}"

    @property
    def http_endpoint(self) -> str:
        return f"{self.host}:{self.http_port}"


@dataclass
class BenchConfig:
    corpus_records: int
    corpus_seed: int
    corpus_dir: str
    nodes: list[int] = field(default_factory=lambda: [1, 2, 4, 8])
    vos: int = 1
    queries: int = 20
    workload_seed: int = 1
    keyword_fraction: float = 0.7
    top_k: int = 10
    repetitions: int = 5
    task_timeout_s: float = 60.0
    startup_timeout_s: float = 30.0

    def validate(self) -> None:
        if self.repetitions < 3:
            raise ConfigError("repetitions must be >= 3")
        if not self.nodes:
            raise ConfigError("nodes list must be non-empty")
        if any(n < 1 for n in self.nodes):
            raise ConfigError("node counts must be >= 1")
        if 1 not in self.nodes:
            raise ConfigError("nodes list must include 1 (the serial baseline)")
        if self.vos < 1 or self.vos > min(self.nodes):
            raise ConfigError("vos must be >= 1 and <= every node count")
        if self.queries < 1:
            raise ConfigError("queries must be >= 1")
        if not (0.0 <= self.keyword_fraction <= 1.0):
            raise ConfigError("keyword_fraction must be in [0, 1]")


def load_worker_config(path: Path) -> WorkerConfig:
    return _build(WorkerConfig, _load_json(path), Path(path))


def load_broker_config(path: Path) -> BrokerConfig:
    return _build(BrokerConfig, _load_json(path), Path(path))


def load_bench_config(path: Path) -> BenchConfig:
    cfg = _build(BenchConfig, _load_json(path), Path(path))
    cfg.validate()
    return cfg


def dump_config(cfg) -> str:
    return json.dumps(cfg.__dict__, indent=2) + "\n"
