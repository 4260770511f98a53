"""The message protocol connecting workers, brokers, peers, and clients.

Framing: newline-delimited JSON, UTF-8, one envelope object per line, no
raw newlines inside (string escapes only). Envelope shape:

    {"v": 1, "type": "<Type>", "id": "<sender-unique>", "payload": {...}}

Payloads are built through the make_* helpers below, which fix the key
order, so a given envelope always encodes to the same bytes (the golden
protocol tests pin them). Decoding distinguishes malformed JSON, unknown
type, and version mismatch; none of them poison the connection.
"""
from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass

from .errors import (
    MalformedMessageError,
    UnknownMessageTypeError,
    VersionMismatchError,
)

PROTOCOL_VERSION = 1

REGISTER = "Register"
REGISTER_ACK = "RegisterAck"
HEARTBEAT = "Heartbeat"
SEARCH_TASK = "SearchTask"
SEARCH_TASK_RESULT = "SearchTaskResult"
SEARCH_TASK_ERROR = "SearchTaskError"
SUBMIT_QUERY = "SubmitQuery"
QUERY_RESULT = "QueryResult"
PEER_QUERY = "PeerQuery"
PEER_RESULT = "PeerResult"
STATUS_REQUEST = "StatusRequest"
STATUS_RESPONSE = "StatusResponse"
DEREGISTER = "Deregister"

MESSAGE_TYPES = frozenset(
    {
        REGISTER,
        REGISTER_ACK,
        HEARTBEAT,
        SEARCH_TASK,
        SEARCH_TASK_RESULT,
        SEARCH_TASK_ERROR,
        SUBMIT_QUERY,
        QUERY_RESULT,
        PEER_QUERY,
        PEER_RESULT,
        STATUS_REQUEST,
        STATUS_RESPONSE,
        DEREGISTER,
    }
)


@dataclass(frozen=True)
class Envelope:
    v: int
    type: str
    id: str
    payload: dict


def envelope(msg_type: str, msg_id: str, payload: dict) -> Envelope:
    return Envelope(v=PROTOCOL_VERSION, type=msg_type, id=msg_id, payload=payload)


def dumps_canonical(obj) -> str:
    """Compact ASCII JSON; key order is the dict insertion order."""
    return json.dumps(obj, ensure_ascii=True, separators=(",", ":"))


def encode(env: Envelope) -> bytes:
    """One byte line, newline-terminated."""
    obj = {"v": env.v, "type": env.type, "id": env.id, "payload": env.payload}
    return dumps_canonical(obj).encode("utf-8") + b"\n"


def decode(line: bytes | str) -> Envelope:
    """Parse one complete line into an envelope.

    Raises MalformedMessageError / UnknownMessageTypeError /
    VersionMismatchError; the caller's connection stays usable.
    """
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedMessageError(f"not UTF-8: {exc}") from exc
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedMessageError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise MalformedMessageError("envelope is not a JSON object")
    missing = [k for k in ("v", "type", "id", "payload") if k not in obj]
    if missing:
        raise MalformedMessageError(f"envelope missing fields {missing}")
    if not isinstance(obj["v"], int) or isinstance(obj["v"], bool):
        raise MalformedMessageError("envelope v must be an integer")
    if obj["v"] != PROTOCOL_VERSION:
        raise VersionMismatchError(
            f"protocol version {obj['v']} unsupported (expected {PROTOCOL_VERSION})"
        )
    if obj["type"] not in MESSAGE_TYPES:
        raise UnknownMessageTypeError(f"unknown message type {obj['type']!r}")
    if not isinstance(obj["id"], str):
        raise MalformedMessageError("envelope id must be a string")
    if not isinstance(obj["payload"], dict):
        raise MalformedMessageError("envelope payload must be an object")
    return Envelope(v=obj["v"], type=obj["type"], id=obj["id"], payload=obj["payload"])


class IdSource:
    """Session-unique message ids: '<prefix>-<counter>'."""

    def __init__(self, prefix: str):
        self._prefix = prefix
        self._counter = itertools.count(1)
        self._lock = threading.Lock()

    def next(self) -> str:
        with self._lock:
            return f"{self._prefix}-{next(self._counter)}"


# --- payload builders (canonical key order per message type) ---

def make_register(node_id: str, endpoint: str, vo_id: str, partitions: list[dict]) -> dict:
    return {"node_id": node_id, "endpoint": endpoint, "vo_id": vo_id, "partitions": partitions}


def make_register_ack(node_id: str, accepted: bool, reason: str | None = None) -> dict:
    return {"node_id": node_id, "accepted": accepted, "reason": reason}


def make_heartbeat(node_id: str) -> dict:
    return {"node_id": node_id}


def make_search_task(job_id: str, task_id: str, query: dict, partition: dict, top_k: int) -> dict:
    return {
        "job_id": job_id,
        "task_id": task_id,
        "query": query,
        "partition": partition,
        "top_k": top_k,
    }


def make_search_task_result(job_id: str, task_id: str, hits: list[dict], scan_stats: dict) -> dict:
    return {"job_id": job_id, "task_id": task_id, "hits": hits, "scan_stats": scan_stats}


def make_search_task_error(job_id: str, task_id: str, reason: str) -> dict:
    return {"job_id": job_id, "task_id": task_id, "reason": reason}


def make_submit_query(query: dict) -> dict:
    return {"query": query}


def make_query_result(job_id: str, hits: list[dict], partial: bool) -> dict:
    return {"job_id": job_id, "hits": hits, "partial": partial}


def make_peer_query(query: dict, origin_vo: str) -> dict:
    return {"query": query, "origin_vo": origin_vo, "hop": 1}


def make_peer_result(hits: list[dict], vo_id: str) -> dict:
    return {"hits": hits, "vo_id": vo_id}


def make_status_request(job_id: str) -> dict:
    return {"job_id": job_id}


def make_status_response(found: bool, jdf: dict | None) -> dict:
    return {"found": found, "jdf": jdf}


def make_deregister(node_id: str) -> dict:
    return {"node_id": node_id}
