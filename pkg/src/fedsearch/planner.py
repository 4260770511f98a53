"""Greedy longest-processing-time assignment of partitions to hosts.

Partitions are taken largest first (ties by id) and each goes to the
replica host whose finish time (assigned records + this partition's,
divided by learned throughput) is smallest; ties prefer the host with
fewer assigned records, then the lower node_id. Nodes without a history
plan at the configurable default throughput. The result is deterministic
for a fixed input.
"""
from __future__ import annotations

import uuid
from dataclasses import dataclass

from .corpus import DatasetPartition
from .errors import UnplannablePartitionError
from .registry import DEFAULT_THROUGHPUT


@dataclass(frozen=True)
class ExecutionPlan:
    job_id: str
    assignments: tuple[tuple[str, str], ...]  # (node_id, partition_id)
    est_makespan: float


def fresh_job_id() -> str:
    return f"job-{uuid.uuid4().hex[:12]}"


def build_plan(
    partitions_with_hosts: list[tuple[DatasetPartition, list[str]]],
    throughput_of,
    default_throughput: float = DEFAULT_THROUGHPUT,
    job_id: str | None = None,
) -> ExecutionPlan:
    """throughput_of: callable (node_id, default) -> records per second."""
    order = sorted(
        partitions_with_hosts,
        key=lambda item: (-item[0].record_count, item[0].partition_id),
    )
    assigned_records: dict[str, int] = {}
    assignments: list[tuple[str, str]] = []
    rates: dict[str, float] = {}

    def rate(node_id: str) -> float:
        if node_id not in rates:
            rates[node_id] = throughput_of(node_id, default_throughput)
        return rates[node_id]

    for partition, hosts in order:
        if not hosts:
            raise UnplannablePartitionError(partition.partition_id)
        best = min(
            hosts,
            key=lambda h: (
                (assigned_records.get(h, 0) + partition.record_count) / rate(h),
                assigned_records.get(h, 0),
                h,
            ),
        )
        assignments.append((best, partition.partition_id))
        assigned_records[best] = assigned_records.get(best, 0) + partition.record_count

    est_makespan = max(
        (records / rate(node) for node, records in assigned_records.items()),
        default=0.0,
    )
    return ExecutionPlan(
        job_id=job_id or fresh_job_id(),
        assignments=tuple(assignments),
        est_makespan=est_makespan,
    )
