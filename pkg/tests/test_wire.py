import threading
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedsearch import transport, wire
from fedsearch.errors import (
    MalformedMessageError,
    ProtocolError,
    UnknownMessageTypeError,
    VersionMismatchError,
)

from wire_fixtures import catalog_envelopes

GOLDEN = Path(__file__).parent / "golden" / "wire_messages.jsonl"


def test_round_trip_every_catalog_type():
    for env in catalog_envelopes():
        assert wire.decode(wire.encode(env)) == env


def test_catalog_is_covered_by_fixtures():
    assert {e.type for e in catalog_envelopes()} == set(wire.MESSAGE_TYPES)


def test_golden_bytes_are_stable():
    expected = GOLDEN.read_bytes()
    actual = b"".join(wire.encode(env) for env in catalog_envelopes())
    assert actual == expected


def test_golden_lines_decode_to_fixtures():
    lines = GOLDEN.read_bytes().splitlines()
    envs = catalog_envelopes()
    assert len(lines) == len(envs)
    for line, env in zip(lines, envs):
        assert wire.decode(line) == env


def test_empty_object_is_malformed():
    with pytest.raises(MalformedMessageError):
        wire.decode(b"{}")


def test_bad_json_is_malformed():
    with pytest.raises(MalformedMessageError):
        wire.decode(b"{nope")


def test_version_mismatch():
    line = b'{"v":2,"type":"Heartbeat","id":"x","payload":{}}'
    with pytest.raises(VersionMismatchError):
        wire.decode(line)


def test_unknown_type():
    line = b'{"v":1,"type":"Nonsense","id":"x","payload":{}}'
    with pytest.raises(UnknownMessageTypeError):
        wire.decode(line)


def test_stream_of_k_lines_yields_k_envelopes():
    envs = catalog_envelopes()
    stream = b"".join(wire.encode(e) for e in envs)
    decoded = [wire.decode(line) for line in stream.splitlines()]
    assert decoded == envs


json_scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-(2**53), max_value=2**53),
    st.text(max_size=20),
)
json_values = st.recursive(
    json_scalars,
    lambda children: st.one_of(
        st.lists(children, max_size=4),
        st.dictionaries(st.text(max_size=8), children, max_size=4),
    ),
    max_leaves=12,
)


@settings(max_examples=150, deadline=None)
@given(
    msg_type=st.sampled_from(sorted(wire.MESSAGE_TYPES)),
    msg_id=st.text(min_size=1, max_size=12),
    payload=st.dictionaries(st.text(max_size=10), json_values, max_size=5),
)
def test_round_trip_property(msg_type, msg_id, payload):
    env = wire.envelope(msg_type, msg_id, payload)
    line = wire.encode(env)
    assert line.endswith(b"\n")
    assert line.count(b"\n") == 1
    assert wire.decode(line) == env


def test_encode_is_byte_stable():
    env = catalog_envelopes()[3]
    assert wire.encode(env) == wire.encode(env)


class TestTransport:
    def test_request_reply_and_bad_line_recovery(self):
        seen = []

        def handler(env):
            seen.append(env.type)
            return wire.envelope(wire.REGISTER_ACK, env.id, wire.make_register_ack("n", True))

        server, thread = transport.start_server("127.0.0.1", 0, handler)
        try:
            endpoint = server.endpoint
            env = wire.envelope(wire.REGISTER, "a-1", wire.make_register("n", "e", "v", []))
            reply = transport.request(endpoint, env, timeout=5)
            assert reply.type == wire.REGISTER_ACK
            assert reply.id == "a-1"

            # A malformed line must not break the connection for later lines.
            import socket

            host, port = transport.parse_endpoint(endpoint)
            with socket.create_connection((host, port), timeout=5) as sock:
                sock.sendall(b"{}\n")
                sock.sendall(wire.encode(wire.envelope(wire.REGISTER, "a-2", wire.make_register("n", "e", "v", []))))
                with sock.makefile("rb") as rfile:
                    line = rfile.readline()
            assert wire.decode(line).id == "a-2"
        finally:
            server.shutdown()
            server.server_close()
            thread.join(timeout=5)

    def test_one_way_notify(self):
        got = threading.Event()

        def handler(env):
            if env.type == wire.HEARTBEAT:
                got.set()
            return None

        server, thread = transport.start_server("127.0.0.1", 0, handler)
        try:
            transport.notify(server.endpoint, wire.envelope(wire.HEARTBEAT, "h-1", wire.make_heartbeat("n")), timeout=5)
            assert got.wait(timeout=5)
        finally:
            server.shutdown()
            server.server_close()
            thread.join(timeout=5)

    def test_reply_id_must_echo(self):
        def handler(env):
            return wire.envelope(wire.REGISTER_ACK, "wrong-id", wire.make_register_ack("n", True))

        server, thread = transport.start_server("127.0.0.1", 0, handler)
        try:
            env = wire.envelope(wire.REGISTER, "a-1", wire.make_register("n", "e", "v", []))
            with pytest.raises(ProtocolError):
                transport.request(server.endpoint, env, timeout=5)
        finally:
            server.shutdown()
            server.server_close()
            thread.join(timeout=5)

    def test_parse_endpoint(self):
        assert transport.parse_endpoint("127.0.0.1:9000") == ("127.0.0.1", 9000)
        with pytest.raises(ValueError):
            transport.parse_endpoint("9000")
