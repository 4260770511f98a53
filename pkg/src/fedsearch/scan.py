"""Full sequential scan of one partition, with per-record token caches.

Partitions are immutable, so each record's fields are tokenized once at
load into compact integer-id arrays (a per-partition vocabulary). The
keyword path folds the field weights in by duplication: a record's
weighted id array holds title tokens three times and keyword tokens
twice, making the score one array.count per query token while staying
exactly equal to query.score_keyword. Equality with the per-record
contract functions is property-tested in the suite.

ScanStats.records_scanned always reports the partition's record count:
every task covers the whole partition (there is no index to skip with).
"""
from __future__ import annotations

import heapq
import time
from array import array
from pathlib import Path

from .corpus import DatasetPartition, load_partition
from .query import (
    KIND_KEYWORD,
    Hit,
    Query,
    ScanStats,
    YearRange,
    field_tokens,
    tokenize,
    validate_query,
)
from .records import PublicationRecord

_PREDICATE_FIELDS = ("title", "authors", "keywords", "venue")
_ABSENT = -1


class PartitionSearcher:
    """Scans one loaded partition; safe for concurrent searches."""

    def __init__(self, partition_id: str, records: list[PublicationRecord]):
        self.partition_id = partition_id
        self.record_count = len(records)
        self._vocab: dict[str, int] = {}
        self._ids: list[int] = []
        self._years: list[int] = []
        self._titles: list[str] = []
        self._weighted: list[array] = []
        self._fields: list[tuple[array, array, array, array]] = []
        for rec in records:
            self._add(rec)

    def _encode(self, tokens: list[str]) -> list[int]:
        vocab = self._vocab
        out = []
        for tok in tokens:
            i = vocab.get(tok)
            if i is None:
                i = len(vocab)
                vocab[tok] = i
            out.append(i)
        return out

    def _add(self, rec: PublicationRecord) -> None:
        title = self._encode(field_tokens(rec, "title"))
        keywords = self._encode(field_tokens(rec, "keywords"))
        abstract = self._encode(field_tokens(rec, "abstract"))
        authors = self._encode(field_tokens(rec, "authors"))
        venue = self._encode(field_tokens(rec, "venue"))
        self._ids.append(rec.id)
        self._years.append(rec.year)
        self._titles.append(rec.title)
        self._weighted.append(array("i", title * 3 + keywords * 2 + abstract + authors + venue))
        self._fields.append(
            (array("i", title), array("i", authors), array("i", keywords), array("i", venue))
        )

    def search(self, query: Query) -> tuple[list[Hit], ScanStats]:
        validate_query(query)
        start = time.perf_counter()
        if query.kind == KIND_KEYWORD:
            top = self._scan_keyword(query)
        else:
            top = self._scan_multivariate(query)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        hits = [
            Hit(
                record_id=self._ids[idx],
                score=score,
                partition_id=self.partition_id,
                year=self._years[idx],
                title=self._titles[idx],
            )
            for score, idx in top
        ]
        stats = ScanStats(
            records_scanned=self.record_count,
            elapsed_ms=elapsed_ms,
            partition_id=self.partition_id,
        )
        return hits, stats

    def _scan_keyword(self, query: Query) -> list[tuple[int, int]]:
        # Tokens outside the vocabulary score zero on every record.
        token_ids = [
            tid for tid in (self._vocab.get(t, _ABSENT) for t in tokenize(query.text))
            if tid != _ABSENT
        ]
        matches: list[tuple[int, int, int]] = []  # (-score, record_id, row idx)
        if len(token_ids) == 1:
            t = token_ids[0]
            for idx, w in enumerate(self._weighted):
                s = w.count(t)
                if s:
                    matches.append((-s, self._ids[idx], idx))
        elif token_ids:
            for idx, w in enumerate(self._weighted):
                s = 0
                for t in token_ids:
                    s += w.count(t)
                if s:
                    matches.append((-s, self._ids[idx], idx))
        top = heapq.nsmallest(query.top_k, matches)
        return [(-neg, idx) for neg, _rid, idx in top]

    def _scan_multivariate(self, query: Query) -> list[tuple[int, int]]:
        year_ranges = []
        preds: list[tuple[int, list[int]]] = []  # (field slot, required ids)
        impossible = False
        for c in query.constraints:
            if isinstance(c, YearRange):
                year_ranges.append((c.lo, c.hi))
            else:
                slot = _PREDICATE_FIELDS.index(c.field)
                ids = [self._vocab.get(t, _ABSENT) for t in tokenize(c.token)]
                if _ABSENT in ids:
                    impossible = True  # token absent from the whole partition
                preds.append((slot, ids))
        matches: list[tuple[int, int]] = []  # (record_id, row idx)
        if not impossible:
            years = self._years
            fields = self._fields
            for idx in range(self.record_count):
                year = years[idx]
                ok = True
                for lo, hi in year_ranges:
                    if not (lo <= year <= hi):
                        ok = False
                        break
                if ok and preds:
                    row_fields = fields[idx]
                    for slot, ids in preds:
                        have = row_fields[slot]
                        if not all(t in have for t in ids):
                            ok = False
                            break
                if ok:
                    matches.append((self._ids[idx], idx))
        top = heapq.nsmallest(query.top_k, matches)
        return [(1, idx) for _rid, idx in top]


def execute_search(
    query: Query, partition: DatasetPartition, base_dir: Path | None = None
) -> tuple[list[Hit], ScanStats]:
    """One-shot contract entry point: load, verify, and scan a partition."""
    records = load_partition(partition, base_dir=base_dir)
    return PartitionSearcher(partition.partition_id, records).search(query)
