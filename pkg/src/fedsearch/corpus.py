"""Synthetic corpus generation, the on-disk dataset layout, and partitioning.

Layout of a corpus directory:

    manifest.json    {"corpus_id", "records", "seed", "partitions": [...]}
    part-0000.jsonl  newline-delimited records (see records.py), LF endings

A fresh corpus is a single partition; ``partition_dataset`` re-splits it
into k partition files using a contiguous block rule so record i lands in
partition i // ceil(n/k). Partition files are immutable once written.

Vocabulary pools are built deterministically from syllable products (no
RNG), and field text is sampled from them with Zipf-style weights so term
frequencies are skewed and reproducible for a given seed.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import CorpusError, MalformedRecordError, PartitionIntegrityError
from .records import (
    PublicationRecord,
    content_digest,
    file_digest,
    parse_record,
    serialize_record,
)

MANIFEST_NAME = "manifest.json"

TITLE_VOCAB_SIZE = 2_000
ABSTRACT_VOCAB_SIZE = 10_000
KEYWORD_VOCAB_SIZE = 500
ZIPF_EXPONENT = 1.1

_CONSONANTS = "b c d f g l m n p r s t v z".split()
_VOWELS = "a e i o u".split()


def _syllables() -> list[str]:
    return [c + v for c, v in itertools.product(_CONSONANTS, _VOWELS)]


def _make_stems(count: int) -> list[str]:
    """First `count` pseudo-words from the 2- and 3-syllable product."""
    syl = _syllables()
    out: list[str] = []
    for pair in itertools.product(syl, syl):
        out.append("".join(pair))
        if len(out) >= count:
            return out
    for triple in itertools.product(syl, syl, syl):
        out.append("".join(triple))
        if len(out) >= count:
            return out
    raise ValueError(f"cannot build {count} stems")


_STEMS = _make_stems(ABSTRACT_VOCAB_SIZE + 4_000)

ABSTRACT_VOCAB = _STEMS[:ABSTRACT_VOCAB_SIZE]
TITLE_VOCAB = _STEMS[ABSTRACT_VOCAB_SIZE : ABSTRACT_VOCAB_SIZE + TITLE_VOCAB_SIZE]
KEYWORD_VOCAB = _STEMS[
    ABSTRACT_VOCAB_SIZE + TITLE_VOCAB_SIZE : ABSTRACT_VOCAB_SIZE + TITLE_VOCAB_SIZE + KEYWORD_VOCAB_SIZE
]
_NAME_STEMS = _STEMS[-1_500:]

AUTHOR_POOL = [
    f"{a.capitalize()} {b.capitalize()}"
    for a, b in zip(_NAME_STEMS[:700], reversed(_NAME_STEMS[700:1400]))
]
VENUE_POOL = [
    f"journal of {w}" for w in TITLE_VOCAB[:25]
] + [
    f"international conference on {w}" for w in TITLE_VOCAB[25:50]
]

YEAR_LO = 1960
YEAR_HI = 2025


def _zipf_cum_weights(size: int) -> list[float]:
    acc, out = 0.0, []
    for rank in range(1, size + 1):
        acc += 1.0 / rank**ZIPF_EXPONENT
        out.append(acc)
    return out


_CUM_ABSTRACT = _zipf_cum_weights(ABSTRACT_VOCAB_SIZE)
_CUM_TITLE = _zipf_cum_weights(TITLE_VOCAB_SIZE)
_CUM_KEYWORD = _zipf_cum_weights(KEYWORD_VOCAB_SIZE)


@dataclass(frozen=True, slots=True)
class DatasetPartition:
    partition_id: str
    uri: str
    record_count: int
    content_digest: str

    def to_payload(self) -> dict:
        return {
            "partition_id": self.partition_id,
            "uri": self.uri,
            "record_count": self.record_count,
            "content_digest": self.content_digest,
        }

    @classmethod
    def from_payload(cls, obj: dict) -> "DatasetPartition":
        return cls(
            partition_id=obj["partition_id"],
            uri=obj["uri"],
            record_count=obj["record_count"],
            content_digest=obj["content_digest"],
        )


@dataclass(frozen=True, slots=True)
class CorpusManifest:
    corpus_id: str
    records: int
    seed: int
    partitions: tuple[DatasetPartition, ...]
    path: Path | None = None

    def base_dir(self) -> Path:
        if self.path is None:
            raise CorpusError("manifest has no file path to resolve partition uris against")
        return self.path.parent

    def resolve_uri(self, partition: DatasetPartition) -> Path:
        p = Path(partition.uri)
        return p if p.is_absolute() else self.base_dir() / p


def _sample_words(rng: random.Random, vocab: list[str], cum: list[float], k: int) -> list[str]:
    return rng.choices(vocab, cum_weights=cum, k=k)


def _make_record(rng: random.Random, rec_id: int) -> PublicationRecord:
    title_words = _sample_words(rng, TITLE_VOCAB, _CUM_TITLE, rng.randint(4, 8))
    title = " ".join(w.capitalize() for w in title_words)
    sentences = []
    for _ in range(rng.randint(3, 5)):
        words = _sample_words(rng, ABSTRACT_VOCAB, _CUM_ABSTRACT, rng.randint(8, 13))
        sentences.append(" ".join(words).capitalize() + ".")
    abstract = " ".join(sentences)
    authors = tuple(rng.choice(AUTHOR_POOL) for _ in range(rng.randint(1, 4)))
    keywords = tuple(_sample_words(rng, KEYWORD_VOCAB, _CUM_KEYWORD, rng.randint(2, 5)))
    venue = rng.choice(VENUE_POOL)
    year = rng.randint(YEAR_LO, YEAR_HI)
    return PublicationRecord(
        id=rec_id,
        title=title,
        authors=authors,
        abstract=abstract,
        keywords=keywords,
        venue=venue,
        year=year,
    )


def _partition_name(index: int) -> str:
    return f"part-{index:04d}"


def save_manifest(manifest: CorpusManifest, path: Path) -> CorpusManifest:
    obj = {
        "corpus_id": manifest.corpus_id,
        "records": manifest.records,
        "seed": manifest.seed,
        "partitions": [p.to_payload() for p in manifest.partitions],
    }
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
    tmp.replace(path)
    return CorpusManifest(
        corpus_id=manifest.corpus_id,
        records=manifest.records,
        seed=manifest.seed,
        partitions=manifest.partitions,
        path=path,
    )


def load_manifest(path: Path) -> CorpusManifest:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusError(f"cannot read manifest {path}: {exc}") from exc
    return CorpusManifest(
        corpus_id=obj["corpus_id"],
        records=obj["records"],
        seed=obj["seed"],
        partitions=tuple(DatasetPartition.from_payload(p) for p in obj["partitions"]),
        path=Path(path),
    )


def generate_corpus(n: int, seed: int, out_dir: Path) -> CorpusManifest:
    """Write n seeded records to out_dir as a single-partition corpus.

    Byte-identical output for identical (n, seed). Record ids are 0..n-1.
    """
    if n < 0:
        raise ValueError("record count must be >= 0")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    name = _partition_name(0)
    file_path = out_dir / f"{name}.jsonl"
    h = hashlib.blake2b(digest_size=8)
    count = 0
    with open(file_path, "wb") as fh:
        for rec_id in range(n):
            line = serialize_record(_make_record(rng, rec_id)).encode("utf-8") + b"\n"
            fh.write(line)
            h.update(line)
            count += 1
    partition = DatasetPartition(
        partition_id=name,
        uri=file_path.name,
        record_count=count,
        content_digest=h.hexdigest(),
    )
    manifest = CorpusManifest(
        corpus_id=f"corpus-{seed}-{n}",
        records=n,
        seed=seed,
        partitions=(partition,),
    )
    return save_manifest(manifest, out_dir / MANIFEST_NAME)


def partition_dataset(manifest: CorpusManifest, k: int) -> list[DatasetPartition]:
    """Re-split the corpus into k contiguous block partitions.

    Record i goes to partition i // ceil(n/k); trailing partitions may be
    empty. Rewrites the partition files and the manifest in place.
    """
    if k < 1:
        raise ValueError("partition count must be >= 1")
    n = manifest.records
    block = -(-n // k) if n else 0
    base = manifest.base_dir()
    # Stream all current partition lines in id order into the new layout.
    lines = _iter_lines(manifest)
    new_parts: list[DatasetPartition] = []
    written = 0
    for i in range(k):
        name = _partition_name(i)
        path = base / f"{name}.jsonl.new"
        h = hashlib.blake2b(digest_size=8)
        count = 0
        take = 0 if block == 0 else max(0, min(block, n - i * block))
        with open(path, "wb") as fh:
            for _ in range(take):
                line = next(lines)
                fh.write(line)
                h.update(line)
                count += 1
                written += 1
        new_parts.append(
            DatasetPartition(
                partition_id=name,
                uri=f"{name}.jsonl",
                record_count=count,
                content_digest=h.hexdigest(),
            )
        )
    if written != n:
        raise CorpusError(f"corpus claims {n} records but files held {written}")

    for old in manifest.partitions:
        manifest.resolve_uri(old).unlink(missing_ok=True)
    for part in new_parts:
        (base / f"{part.partition_id}.jsonl.new").replace(base / part.uri)
    save_manifest(
        CorpusManifest(
            corpus_id=manifest.corpus_id,
            records=n,
            seed=manifest.seed,
            partitions=tuple(new_parts),
        ),
        base / MANIFEST_NAME,
    )
    return new_parts


def _iter_lines(manifest: CorpusManifest):
    for part in manifest.partitions:
        with open(manifest.resolve_uri(part), "rb") as fh:
            for line in fh:
                yield line


def load_partition(partition: DatasetPartition, base_dir: Path | None = None) -> list[PublicationRecord]:
    """Load and validate one partition; digest is checked before parsing."""
    path = Path(partition.uri)
    if not path.is_absolute():
        if base_dir is None:
            raise CorpusError(f"relative partition uri {partition.uri!r} needs a base_dir")
        path = Path(base_dir) / path
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CorpusError(f"cannot read partition {partition.partition_id}: {exc}") from exc
    digest = content_digest(data)
    if digest != partition.content_digest:
        raise PartitionIntegrityError(
            f"partition {partition.partition_id}: digest {digest} != recorded {partition.content_digest}"
        )
    records: list[PublicationRecord] = []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        text = raw.decode("utf-8", errors="replace")
        try:
            records.append(parse_record(text))
        except ValueError as exc:
            raise MalformedRecordError(str(exc), lineno) from exc
    if len(records) != partition.record_count:
        raise CorpusError(
            f"partition {partition.partition_id}: {len(records)} records on disk, "
            f"manifest says {partition.record_count}"
        )
    return records


def load_partition_map(manifest: CorpusManifest) -> dict[str, DatasetPartition]:
    return {p.partition_id: p for p in manifest.partitions}


__all__ = [
    "DatasetPartition",
    "CorpusManifest",
    "generate_corpus",
    "partition_dataset",
    "load_partition",
    "load_manifest",
    "save_manifest",
    "load_partition_map",
    "file_digest",
    "ABSTRACT_VOCAB",
    "TITLE_VOCAB",
    "KEYWORD_VOCAB",
    "VENUE_POOL",
    "AUTHOR_POOL",
    "YEAR_LO",
    "YEAR_HI",
]
