import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedsearch.corpus import DatasetPartition
from fedsearch.errors import DuplicateNodeError
from fedsearch.query import ScanStats
from fedsearch.registry import NodeRegistry, PerformanceTable


def part(pid, count=10):
    return DatasetPartition(pid, f"{pid}.jsonl", count, "0" * 16)


class FakeClock:
    def __init__(self):
        self.now = 1000.0

    def __call__(self):
        return self.now

    def advance(self, secs):
        self.now += secs


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def registry(clock):
    return NodeRegistry(heartbeat_interval=2.0, offline_after=3, clock=clock)


class TestNodeRegistry:
    def test_register_makes_node_online(self, registry):
        registry.register("a", "127.0.0.1:9100", "vo1", [part("p0")])
        [node] = registry.snapshot()
        assert node.node_id == "a"
        assert node.status == "online"

    def test_three_missed_intervals_flip_offline(self, registry, clock):
        registry.register("a", "e1", "vo1", [])
        clock.advance(5.9)
        assert registry.snapshot()[0].status == "online"
        clock.advance(0.2)  # past 3 * 2s
        assert registry.snapshot()[0].status == "offline"

    def test_heartbeat_revives_offline_node(self, registry, clock):
        registry.register("a", "e1", "vo1", [])
        clock.advance(10)
        assert registry.snapshot()[0].status == "offline"
        assert registry.heartbeat("a")
        assert registry.snapshot()[0].status == "online"

    def test_duplicate_id_different_endpoint_rejected(self, registry):
        registry.register("a", "e1", "vo1", [])
        with pytest.raises(DuplicateNodeError):
            registry.register("a", "e2", "vo1", [])

    def test_reregister_same_endpoint_refreshes(self, registry, clock):
        registry.register("a", "e1", "vo1", [])
        clock.advance(10)
        registry.register("a", "e1", "vo1", [])
        assert registry.snapshot()[0].status == "online"

    def test_heartbeat_unknown_node(self, registry):
        assert not registry.heartbeat("ghost")

    def test_deregister_removes(self, registry):
        registry.register("a", "e1", "vo1", [])
        registry.deregister("a")
        assert registry.snapshot() == []


class TestLocateDataSources:
    def test_one_partition_per_node(self, registry):
        for i in range(4):
            registry.register(f"n{i}", f"e{i}", "vo1", [part(f"p{i}")])
        located = registry.locate_data_sources()
        assert len(located) == 4
        assert all(len(hosts) == 1 for _p, hosts in located)

    def test_replica_with_offline_host_excluded(self, registry, clock):
        registry.register("a", "e1", "vo1", [part("p0")])
        registry.register("b", "e2", "vo1", [part("p0")])
        clock.advance(10)
        registry.heartbeat("b")
        located = registry.locate_data_sources()
        assert located == [(part("p0"), ["b"])]

    def test_partition_with_no_online_host_has_empty_list(self, registry, clock):
        registry.register("a", "e1", "vo1", [part("p0")])
        clock.advance(10)
        [(p, hosts)] = registry.locate_data_sources()
        assert p.partition_id == "p0"
        assert hosts == []

    def test_empty_registry(self, registry):
        assert registry.locate_data_sources() == []


class TestPerformanceTable:
    def test_ewma_blend(self):
        t = PerformanceTable(alpha=0.3)
        t.record("a", ScanStats(records_scanned=1000, elapsed_ms=1000.0, partition_id="p"))
        assert t.get("a").ewma_throughput == pytest.approx(1000.0)
        t.record("a", ScanStats(records_scanned=2000, elapsed_ms=1000.0, partition_id="p"))
        assert t.get("a").ewma_throughput == pytest.approx(1300.0)
        assert t.get("a").sample_count == 2

    def test_first_sample_initializes(self):
        t = PerformanceTable()
        rec = t.record("a", ScanStats(records_scanned=500, elapsed_ms=1000.0, partition_id="p"))
        assert rec.ewma_throughput == pytest.approx(500.0)
        assert rec.sample_count == 1

    def test_fixed_point(self):
        t = PerformanceTable(alpha=0.3)
        t.record("a", ScanStats(records_scanned=800, elapsed_ms=1000.0, partition_id="p"))
        t.record("a", ScanStats(records_scanned=800, elapsed_ms=1000.0, partition_id="p"))
        assert t.get("a").ewma_throughput == pytest.approx(800.0)

    def test_nonpositive_elapsed_discarded_as_anomaly(self):
        t = PerformanceTable()
        assert t.record("a", ScanStats(records_scanned=10, elapsed_ms=0.0, partition_id="p")) is None
        assert t.record("a", ScanStats(records_scanned=10, elapsed_ms=-5.0, partition_id="p")) is None
        assert t.anomalies == 2
        assert t.get("a") is None

    def test_zero_records_sample_is_uninformative(self):
        t = PerformanceTable()
        t.record("a", ScanStats(records_scanned=0, elapsed_ms=1.0, partition_id="p"))
        assert t.get("a") is None

    def test_persistence_round_trip(self, tmp_path):
        store = tmp_path / "perf.json"
        t1 = PerformanceTable(store_path=store)
        t1.record("a", ScanStats(records_scanned=100, elapsed_ms=50.0, partition_id="p"))
        t2 = PerformanceTable(store_path=store)
        assert t2.get("a").ewma_throughput == pytest.approx(t1.get("a").ewma_throughput)
        assert t2.get("a").sample_count == 1

    @settings(max_examples=200, deadline=None)
    @given(
        old=st.floats(min_value=0.001, max_value=1e6),
        scanned=st.integers(min_value=1, max_value=10**6),
        elapsed=st.floats(min_value=0.001, max_value=1e6),
    )
    def test_ewma_bounded_by_old_and_observed(self, old, scanned, elapsed):
        t = PerformanceTable(alpha=0.3)
        t.record("a", ScanStats(records_scanned=1, elapsed_ms=1000.0 / old, partition_id="p"))
        before = t.get("a").ewma_throughput
        t.record("a", ScanStats(records_scanned=scanned, elapsed_ms=elapsed, partition_id="p"))
        after = t.get("a").ewma_throughput
        observed = scanned / (elapsed / 1000.0)
        eps = 1e-12
        assert min(before, observed) * (1 - eps) <= after <= max(before, observed) * (1 + eps)
        assert after > 0
