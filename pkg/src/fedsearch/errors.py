"""Exception types shared across the package."""


class FedSearchError(Exception):
    """Base class for all package errors."""


class ConfigError(FedSearchError):
    """A config file is missing, unreadable, or has a bad key."""


class CorpusError(FedSearchError):
    """Base for dataset/partition problems."""


class PartitionIntegrityError(CorpusError):
    """Partition file bytes do not match the recorded content digest."""


class MalformedRecordError(CorpusError):
    """A partition line failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class InvalidQueryError(FedSearchError):
    """Query violates its invariants (empty keyword, bad year range, ...)."""


class ProtocolError(FedSearchError):
    """Base for wire protocol violations."""


class MalformedMessageError(ProtocolError):
    """Line is not a valid envelope (bad JSON or missing fields)."""


class UnknownMessageTypeError(ProtocolError):
    """Envelope type is outside the message catalog."""


class VersionMismatchError(ProtocolError):
    """Envelope protocol version is not the supported one."""


class DuplicateNodeError(FedSearchError):
    """A node_id re-registered with a different endpoint."""


class UnplannablePartitionError(FedSearchError):
    """A partition has no online replica host; names the partition."""

    def __init__(self, partition_id: str):
        super().__init__(f"no online host for partition {partition_id!r}")
        self.partition_id = partition_id


class JobNotFoundError(FedSearchError):
    """job_id is not in the job store."""


class InvalidTransitionError(FedSearchError):
    """Attempted job status change outside the allowed edges."""
