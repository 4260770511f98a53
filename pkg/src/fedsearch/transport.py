"""Socket plumbing for the line protocol: one-shot requests and servers.

A connection carries sequential envelopes; replies echo the request id.
Servers are threaded, one handler thread per connection, and a connection
may pipeline any number of requests.
"""
from __future__ import annotations

import logging
import socket
import socketserver
import threading

from .errors import ProtocolError
from .wire import Envelope, decode, encode

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    host, sep, port = endpoint.rpartition(":")
    if not sep or not host:
        raise ValueError(f"endpoint {endpoint!r} is not host:port")
    return host, int(port)


def format_endpoint(host: str, port: int) -> str:
    return f"{host}:{port}"


def send_envelope(sock: socket.socket, env: Envelope) -> None:
    sock.sendall(encode(env))


def request(endpoint: str, env: Envelope, timeout: float = DEFAULT_TIMEOUT) -> Envelope:
    """Open a connection, send one envelope, wait for the correlated reply."""
    host, port = parse_endpoint(endpoint)
    with socket.create_connection((host, port), timeout=timeout) as sock:
        sock.settimeout(timeout)
        send_envelope(sock, env)
        with sock.makefile("rb") as rfile:
            line = rfile.readline()
    if not line:
        raise ConnectionError(f"{endpoint}: connection closed before reply")
    reply = decode(line)
    if reply.id != env.id:
        raise ProtocolError(f"reply id {reply.id!r} does not echo request id {env.id!r}")
    return reply


def notify(endpoint: str, env: Envelope, timeout: float = DEFAULT_TIMEOUT) -> None:
    """Send a one-way envelope (Heartbeat, Deregister); no reply expected."""
    host, port = parse_endpoint(endpoint)
    with socket.create_connection((host, port), timeout=timeout) as sock:
        send_envelope(sock, env)


class LineProtocolServer(socketserver.ThreadingTCPServer):
    """TCP server feeding decoded envelopes to a handler callable.

    handler(envelope) returns a reply Envelope or None (one-way message).
    Decode errors are logged and skipped; the connection stays open, so a
    bad line never takes down the lines after it.
    """

    allow_reuse_address = True
    daemon_threads = False
    block_on_close = True

    def __init__(self, host: str, port: int, handler):
        self.envelope_handler = handler
        super().__init__((host, port), _LineRequestHandler)

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return format_endpoint(host, port)


class _LineRequestHandler(socketserver.StreamRequestHandler):
    def handle(self):
        for line in self.rfile:
            try:
                env = decode(line)
            except ProtocolError as exc:
                log.warning("dropping bad line from %s: %s", self.client_address, exc)
                continue
            try:
                reply = self.server.envelope_handler(env)
            except Exception:
                log.exception("handler failed for %s message %s", env.type, env.id)
                return
            if reply is not None:
                try:
                    self.wfile.write(encode(reply))
                except (BrokenPipeError, ConnectionResetError):
                    return


def start_server(host: str, port: int, handler) -> tuple[LineProtocolServer, threading.Thread]:
    """Bind and serve in a daemon thread; raises OSError if the bind fails."""
    server = LineProtocolServer(host, port, handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True, name=f"wire-{port}")
    thread.start()
    return server, thread
