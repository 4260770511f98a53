"""One fully populated envelope per wire message type, in catalog order.

The golden byte lines under tests/golden/ are the encodings of exactly
these envelopes; regenerate with scripts/regen_wire_goldens.py only when
the protocol intentionally changes.
"""
from fedsearch import wire

QUERY_KEYWORD = {
    "kind": "keyword",
    "text": "grid search",
    "constraints": [],
    "top_k": 5,
}
QUERY_MULTI = {
    "kind": "multivariate",
    "text": "",
    "constraints": [
        {"field": "venue", "token": "sigir"},
        {"field": "year", "lo": 2010, "hi": 2012},
    ],
    "top_k": 3,
}
PARTITION = {
    "partition_id": "part-0001",
    "uri": "part-0001.jsonl",
    "record_count": 250,
    "content_digest": "00ff00ff00ff00ff",
}
HIT = {
    "record_id": 17,
    "score": 6,
    "partition_id": "part-0001",
    "year": 2011,
    "title": "Grid Search Methods",
}
STATS = {"partition_id": "part-0001", "records_scanned": 250, "elapsed_ms": 12.5}
JDF = {
    "job_id": "job-abc123",
    "query": QUERY_KEYWORD,
    "tasks": [
        {
            "task_id": "t0",
            "node_id": "w1",
            "endpoint": "127.0.0.1:9101",
            "partition_id": "part-0001",
            "outcome": "ok",
            "error": None,
            "attempts": 1,
            "stats": STATS,
        }
    ],
    "result_sink": "127.0.0.1:9001",
    "created_at": "2026-01-02T03:04:05.678Z",
    "status": "done",
}


def catalog_envelopes():
    return [
        wire.envelope(wire.REGISTER, "m-1", wire.make_register("w1", "127.0.0.1:9101", "vo1", [PARTITION])),
        wire.envelope(wire.REGISTER_ACK, "m-1", wire.make_register_ack("w1", True, None)),
        wire.envelope(wire.HEARTBEAT, "m-2", wire.make_heartbeat("w1")),
        wire.envelope(
            wire.SEARCH_TASK,
            "m-3",
            wire.make_search_task("job-abc123", "t0", QUERY_KEYWORD, PARTITION, 5),
        ),
        wire.envelope(
            wire.SEARCH_TASK_RESULT,
            "m-3",
            wire.make_search_task_result("job-abc123", "t0", [HIT], STATS),
        ),
        wire.envelope(
            wire.SEARCH_TASK_ERROR,
            "m-4",
            wire.make_search_task_error("job-abc123", "t1", "partition digest mismatch"),
        ),
        wire.envelope(wire.SUBMIT_QUERY, "m-5", wire.make_submit_query(QUERY_MULTI)),
        wire.envelope(wire.QUERY_RESULT, "m-5", wire.make_query_result("job-abc123", [HIT], False)),
        wire.envelope(wire.PEER_QUERY, "m-6", wire.make_peer_query(QUERY_KEYWORD, "vo1")),
        wire.envelope(wire.PEER_RESULT, "m-6", wire.make_peer_result([HIT], "vo2")),
        wire.envelope(wire.STATUS_REQUEST, "m-7", wire.make_status_request("job-abc123")),
        wire.envelope(wire.STATUS_RESPONSE, "m-7", wire.make_status_response(True, JDF)),
        wire.envelope(wire.DEREGISTER, "m-8", wire.make_deregister("w1")),
    ]
