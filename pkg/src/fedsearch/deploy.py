"""Desk-scale deployments: broker and worker subprocesses on localhost.

Writes the config files, spawns `python -m fedsearch broker|worker`
processes, waits for every worker to show up online in its broker's
registry, and tears the lot down. Used by the benchmark harness, the
integration tests, and demo scripts; stdout/stderr of each process land
in the work directory for post-mortems.
"""
from __future__ import annotations

import json
import signal
import socket
import subprocess
import sys
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

from .config import BrokerConfig, WorkerConfig, dump_config


@dataclass
class WorkerSpec:
    node_id: str
    vo_id: str
    partition_ids: list[str]
    task_delay_ms: int = 0


@dataclass
class DeploymentSpec:
    manifest: Path
    vo_ids: list[str]
    workers: list[WorkerSpec]
    heartbeat_interval_s: float = 2.0
    task_timeout_s: float = 30.0
    peer_timeout_s: float = 30.0
    startup_timeout_s: float = 60.0
    worker_overrides: dict = field(default_factory=dict)


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class LocalDeployment:
    def __init__(self, spec: DeploymentSpec, workdir: Path):
        self.spec = spec
        self.workdir = Path(workdir)
        self.workdir.mkdir(parents=True, exist_ok=True)
        self.broker_configs: dict[str, BrokerConfig] = {}
        self.worker_configs: dict[str, WorkerConfig] = {}
        self._procs: dict[str, subprocess.Popen] = {}
        self._logs: dict[str, object] = {}
        self._build_configs()

    def _build_configs(self) -> None:
        wire_ports = {vo: free_port() for vo in self.spec.vo_ids}
        http_ports = {vo: free_port() for vo in self.spec.vo_ids}
        for vo in self.spec.vo_ids:
            peers = [f"127.0.0.1:{wire_ports[v]}" for v in self.spec.vo_ids if v != vo]
            self.broker_configs[vo] = BrokerConfig(
                vo_id=vo,
                host="127.0.0.1",
                port=wire_ports[vo],
                http_port=http_ports[vo],
                state_dir=str(self.workdir / f"state-{vo}"),
                peers=peers,
                heartbeat_interval_s=self.spec.heartbeat_interval_s,
                task_timeout_s=self.spec.task_timeout_s,
                peer_timeout_s=self.spec.peer_timeout_s,
            )
        for w in self.spec.workers:
            if w.vo_id not in self.broker_configs:
                raise ValueError(f"worker {w.node_id} references unknown VO {w.vo_id}")
            self.worker_configs[w.node_id] = WorkerConfig(
                node_id=w.node_id,
                vo_id=w.vo_id,
                host="127.0.0.1",
                port=free_port(),
                broker=self.broker_configs[w.vo_id].endpoint,
                manifest=str(self.spec.manifest),
                partitions=list(w.partition_ids),
                heartbeat_interval_s=self.spec.heartbeat_interval_s,
                register_backoff_initial_s=0.2,
                task_delay_ms=w.task_delay_ms,
                **self.spec.worker_overrides,
            )

    # ------------------------------------------------------------------

    def _spawn(self, name: str, role: str, config_path: Path) -> None:
        log_path = self.workdir / f"{name}.log"
        log_file = open(log_path, "ab")
        proc = subprocess.Popen(
            [sys.executable, "-m", "fedsearch", role, "--config", str(config_path)],
            stdout=log_file,
            stderr=log_file,
        )
        self._procs[name] = proc
        self._logs[name] = log_file

    def start_broker(self, vo_id: str) -> None:
        cfg = self.broker_configs[vo_id]
        path = self.workdir / f"broker-{vo_id}.json"
        path.write_text(dump_config(cfg))
        self._spawn(f"broker-{vo_id}", "broker", path)

    def start_worker(self, node_id: str) -> None:
        cfg = self.worker_configs[node_id]
        path = self.workdir / f"worker-{node_id}.json"
        path.write_text(dump_config(cfg))
        self._spawn(f"worker-{node_id}", "worker", path)

    def start(self, timeout: float | None = None) -> None:
        for vo in self.spec.vo_ids:
            self.start_broker(vo)
        for w in self.spec.workers:
            self.start_worker(w.node_id)
        self.wait_ready(timeout if timeout is not None else self.spec.startup_timeout_s)

    def wait_ready(self, timeout: float = 30.0) -> None:
        """Block until every worker is online in its broker's registry."""
        expected: dict[str, set[str]] = {vo: set() for vo in self.spec.vo_ids}
        for w in self.spec.workers:
            expected[w.vo_id].add(w.node_id)
        deadline = time.monotonic() + timeout
        for vo, nodes in expected.items():
            while True:
                online = self.online_nodes(vo)
                if nodes <= online:
                    break
                if time.monotonic() > deadline:
                    raise RuntimeError(
                        f"deployment not ready: VO {vo} has {sorted(online)}, wants {sorted(nodes)};"
                        f" see logs under {self.workdir}"
                    )
                self._check_crashed()
                time.sleep(0.05)

    def _check_crashed(self) -> None:
        for name, proc in self._procs.items():
            code = proc.poll()
            if code is not None and code != 0:
                tail = (self.workdir / f"{name}.log").read_text()[-2000:]
                raise RuntimeError(f"process {name} exited {code}:\n{tail}")

    # ------------------------------------------------------------------

    def broker_endpoint(self, vo_id: str) -> str:
        return self.broker_configs[vo_id].endpoint

    def worker_pids(self) -> dict[str, int]:
        return {
            name.removeprefix("worker-"): proc.pid
            for name, proc in self._procs.items()
            if name.startswith("worker-")
        }

    def gateway_url(self, vo_id: str) -> str:
        return f"http://{self.broker_configs[vo_id].http_endpoint}"

    def http_get(self, vo_id: str, path: str, timeout: float = 10.0):
        url = self.gateway_url(vo_id) + path
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            return resp.status, json.loads(resp.read())

    def online_nodes(self, vo_id: str) -> set[str]:
        try:
            _status, body = self.http_get(vo_id, "/nodes", timeout=2.0)
        except (OSError, urllib.error.URLError, json.JSONDecodeError):
            return set()
        return {n["node_id"] for n in body["nodes"] if n["status"] == "online"}

    # ------------------------------------------------------------------

    def kill_worker(self, node_id: str, sig: int = signal.SIGKILL) -> None:
        proc = self._procs.pop(f"worker-{node_id}", None)
        if proc is None:
            raise ValueError(f"worker {node_id} is not running")
        proc.send_signal(sig)
        proc.wait(timeout=10)

    def restart_worker(self, node_id: str, timeout: float = 15.0) -> None:
        """Start the worker again and wait until the new process answers.

        The registry may still carry the dead process as online (its
        liveness window has not expired), so also require a successful
        TCP connect to the worker's port.
        """
        self.start_worker(node_id)
        cfg = self.worker_configs[node_id]
        deadline = time.monotonic() + timeout
        while True:
            try:
                with socket.create_connection((cfg.host, cfg.port), timeout=1.0):
                    bound = True
            except OSError:
                bound = False
            if bound and node_id in self.online_nodes(cfg.vo_id):
                return
            if time.monotonic() > deadline:
                raise RuntimeError(f"worker {node_id} did not come back online")
            self._check_crashed()
            time.sleep(0.05)

    def stop(self) -> None:
        for proc in self._procs.values():
            if proc.poll() is None:
                proc.terminate()
        deadline = time.monotonic() + 10
        for proc in self._procs.values():
            try:
                proc.wait(timeout=max(0.1, deadline - time.monotonic()))
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait(timeout=5)
        self._procs.clear()
        for fh in self._logs.values():
            fh.close()
        self._logs.clear()

    def __enter__(self) -> "LocalDeployment":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def round_robin_workers(
    partition_ids: list[str],
    vo_ids: list[str],
    replicas: dict[str, list[str]] | None = None,
    task_delay_ms: int = 0,
) -> list[WorkerSpec]:
    """One worker per partition, spread across VOs round-robin.

    replicas maps a partition id to extra node_ids that also host it.
    """
    workers = []
    for i, pid in enumerate(partition_ids):
        workers.append(
            WorkerSpec(
                node_id=f"w{i}",
                vo_id=vo_ids[i % len(vo_ids)],
                partition_ids=[pid],
                task_delay_ms=task_delay_ms,
            )
        )
    if replicas:
        by_node = {w.node_id: w for w in workers}
        for pid, extra_nodes in replicas.items():
            for node_id in extra_nodes:
                by_node[node_id].partition_ids.append(pid)
    return workers
