import threading
import time

import pytest

from fedsearch import transport, wire
from fedsearch.config import WorkerConfig
from fedsearch.corpus import load_partition
from fedsearch.deploy import free_port
from fedsearch.query import Query, query_to_payload, tokenize
from fedsearch.worker import RegistrationRejected, SearchWorker, backoff_delays


def test_backoff_schedule_defaults():
    gen = backoff_delays()
    assert [next(gen) for _ in range(7)] == [1, 2, 4, 8, 16, 30, 30]


def test_backoff_respects_cap():
    gen = backoff_delays(initial=5.0, cap=12.0)
    assert [next(gen) for _ in range(4)] == [5.0, 10.0, 12.0, 12.0]


class StubBroker:
    """Accepts registrations and records one-way messages."""

    def __init__(self, accept=True):
        self.accept = accept
        self.registers = []
        self.heartbeats = []
        self.deregisters = []
        self.server, self.thread = transport.start_server("127.0.0.1", 0, self._handle)

    @property
    def endpoint(self):
        return self.server.endpoint

    def _handle(self, env):
        if env.type == wire.REGISTER:
            self.registers.append(env.payload)
            return wire.envelope(
                wire.REGISTER_ACK,
                env.id,
                wire.make_register_ack(env.payload["node_id"], self.accept, None if self.accept else "duplicate"),
            )
        if env.type == wire.HEARTBEAT:
            self.heartbeats.append(env.payload["node_id"])
            return None
        if env.type == wire.DEREGISTER:
            self.deregisters.append(env.payload["node_id"])
            return None
        raise AssertionError(f"unexpected {env.type}")

    def close(self):
        self.server.shutdown()
        self.server.server_close()
        self.thread.join(timeout=5)


def worker_config(small_corpus, broker_endpoint, partitions=("part-0000",), **over):
    defaults = dict(
        node_id="w-test",
        vo_id="vo1",
        host="127.0.0.1",
        port=free_port(),
        broker=broker_endpoint,
        manifest=str(small_corpus.path),
        partitions=list(partitions),
        heartbeat_interval_s=0.2,
        register_backoff_initial_s=0.05,
    )
    defaults.update(over)
    return WorkerConfig(**defaults)


@pytest.fixture
def stub_broker():
    broker = StubBroker()
    yield broker
    broker.close()


def wait_for(predicate, timeout=5.0):
    deadline = time.monotonic() + timeout
    while not predicate():
        if time.monotonic() > deadline:
            return False
        time.sleep(0.02)
    return True


def test_worker_serves_sequential_tasks(small_corpus, stub_broker):
    worker = SearchWorker(worker_config(small_corpus, stub_broker.endpoint))
    worker.start()
    try:
        worker.register()
        assert stub_broker.registers[0]["node_id"] == "w-test"
        assert [p["partition_id"] for p in stub_broker.registers[0]["partitions"]] == ["part-0000"]

        records = load_partition(small_corpus.partitions[0], base_dir=small_corpus.base_dir())
        token = tokenize(records[0].title)[0]
        part_payload = small_corpus.partitions[0].to_payload()
        for i in range(2):
            env = wire.envelope(
                wire.SEARCH_TASK,
                f"task-{i}",
                wire.make_search_task(
                    "job-x", f"t{i}", query_to_payload(Query(kind="keyword", text=token)), part_payload, 10
                ),
            )
            reply = transport.request(worker.config.endpoint, env, timeout=10)
            assert reply.type == wire.SEARCH_TASK_RESULT
            assert reply.id == f"task-{i}"
            assert reply.payload["job_id"] == "job-x"
            assert reply.payload["task_id"] == f"t{i}"
            assert reply.payload["scan_stats"]["records_scanned"] == len(records)
            assert any(h["record_id"] == records[0].id for h in reply.payload["hits"])
    finally:
        worker.stop()
    assert wait_for(lambda: stub_broker.deregisters == ["w-test"])


def test_worker_rejects_unknown_partition(small_corpus, stub_broker):
    worker = SearchWorker(worker_config(small_corpus, stub_broker.endpoint))
    worker.start()
    try:
        ghost = dict(small_corpus.partitions[1].to_payload())
        env = wire.envelope(
            wire.SEARCH_TASK,
            "task-g",
            wire.make_search_task(
                "job-x", "t0", query_to_payload(Query(kind="keyword", text="x")), ghost, 10
            ),
        )
        reply = transport.request(worker.config.endpoint, env, timeout=10)
        assert reply.type == wire.SEARCH_TASK_ERROR
        assert "part-0001" in reply.payload["reason"]
    finally:
        worker.stop()


def test_registration_retries_until_broker_appears(small_corpus):
    port = free_port()
    config = worker_config(small_corpus, f"127.0.0.1:{port}")
    worker = SearchWorker(config)
    worker.start()
    broker_box = {}

    try:
        # Bring the broker up on the retried port only after a delay.
        def delayed():
            time.sleep(0.3)
            server, thread = transport.start_server("127.0.0.1", port, _accepting_handler)
            broker_box["server"] = (server, thread)

        threading.Thread(target=delayed, daemon=True).start()
        start = time.monotonic()
        worker.register()
        elapsed = time.monotonic() - start
        assert elapsed >= 0.05  # at least one backoff sleep happened
    finally:
        worker.stop()
        if "server" in broker_box:
            server, thread = broker_box["server"]
            server.shutdown()
            server.server_close()
            thread.join(timeout=5)


def _accepting_handler(env):
    if env.type == wire.REGISTER:
        return wire.envelope(
            wire.REGISTER_ACK, env.id, wire.make_register_ack(env.payload["node_id"], True)
        )
    return None


def test_registration_rejection_is_fatal(small_corpus):
    broker = StubBroker(accept=False)
    worker = SearchWorker(worker_config(small_corpus, broker.endpoint))
    worker.start()
    try:
        with pytest.raises(RegistrationRejected):
            worker.register()
    finally:
        worker.stop()
        broker.close()


def test_heartbeats_flow(small_corpus, stub_broker):
    worker = SearchWorker(worker_config(small_corpus, stub_broker.endpoint))
    worker.start()
    try:
        worker.register()
        worker.start_heartbeats()
        deadline = time.monotonic() + 5
        while len(stub_broker.heartbeats) < 2 and time.monotonic() < deadline:
            time.sleep(0.05)
        assert len(stub_broker.heartbeats) >= 2
    finally:
        worker.stop()


def test_inflight_task_completes_before_shutdown(small_corpus, stub_broker):
    config = worker_config(small_corpus, stub_broker.endpoint, task_delay_ms=300)
    worker = SearchWorker(config)
    worker.start()
    result_box = {}

    def slow_task():
        env = wire.envelope(
            wire.SEARCH_TASK,
            "task-s",
            wire.make_search_task(
                "job-x",
                "t0",
                query_to_payload(Query(kind="keyword", text="x")),
                small_corpus.partitions[0].to_payload(),
                5,
            ),
        )
        result_box["reply"] = transport.request(worker.config.endpoint, env, timeout=10)

    t = threading.Thread(target=slow_task)
    t.start()
    time.sleep(0.1)  # task is mid-delay
    worker.stop()  # must wait for the in-flight task, then deregister
    t.join(timeout=10)
    assert result_box["reply"].type == wire.SEARCH_TASK_RESULT
    assert wait_for(lambda: stub_broker.deregisters == ["w-test"])
