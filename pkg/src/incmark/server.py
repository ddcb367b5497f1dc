"""Session server: one live document per connection, driven by
length-delimited JSON messages over a local TCP socket.

Message framing: 4-byte big-endian payload length, then UTF-8 JSON. Every
request gets exactly one reply. Replies carry the full document state
(revision, decorated tree text, dirty locations, cursor); protocol details are
documented in protocol.md at the repository root.
"""

from __future__ import annotations

import json
import socket
import socketserver
import struct
import threading
from typing import Optional

from . import actions as A
from . import syntax as S
from .engine import ANA, ANN, ASC, SYN, Doc, NotDirty

SLOTS = (ANA, SYN, ANN, ASC)


class ProtocolError(ValueError):
    pass


def send_message(sock: socket.socket, obj) -> None:
    data = json.dumps(obj, separators=(",", ":")).encode("utf-8")
    sock.sendall(struct.pack(">I", len(data)) + data)


def recv_message(sock: socket.socket) -> Optional[dict]:
    header = _recv_exact(sock, 4)
    if header is None:
        return None
    (length,) = struct.unpack(">I", header)
    if length > 64 * 1024 * 1024:
        raise ProtocolError("message too large")
    body = _recv_exact(sock, length)
    if body is None:
        return None
    return json.loads(body.decode("utf-8"))


def _recv_exact(sock, n):
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


class Session:
    """One editing session: a document plus one cursor."""

    def __init__(self):
        self.doc = Doc(S.HOLE)
        self.cursor: tuple[int, ...] = ()

    # -- state payload -------------------------------------------------------

    def state(self, extra: Optional[dict] = None) -> dict:
        doc = self.doc
        try:
            doc.resolve(self.cursor)
        except A.PathInvalid:
            self.cursor = ()
        dirty = [{"path": list(doc.path_of(n)), "slot": slot}
                 for n, slot in doc.dirty_locations()]
        snap = doc.snapshot()
        reply = {
            "ok": True,
            "revision": doc.revision,
            "quiescent": doc.is_quiescent(),
            "errors": S.count_errors(snap),
            "tree": S.print_decorated(snap),
            "dirty": dirty,
            "cursor": list(self.cursor),
        }
        if extra:
            reply.update(extra)
        return reply

    # -- request handling ------------------------------------------------------

    def handle(self, msg: dict) -> dict:
        try:
            return self._handle(msg)
        except (A.PathInvalid, A.ActionInapplicable, A.TraceParseError,
                S.ParseError, NotDirty, ProtocolError, KeyError, ValueError) as exc:
            return {"ok": False, "error": f"{type(exc).__name__}: {exc}",
                    "revision": self.doc.revision}

    def _handle(self, msg: dict) -> dict:
        op = msg.get("op")
        if op == "open":
            program = msg.get("program", "?")
            self.doc = Doc(S.parse_expr(program))
            self.cursor = ()
            return self.state()
        if op == "state":
            return self.state()
        if op == "move":
            if "path" in msg:
                path = tuple(int(i) for i in msg["path"])
                self.doc.resolve(path)  # validate
                self.cursor = path
            elif msg.get("dir") == "up":
                if self.cursor:
                    self.cursor = self.cursor[:-1]
            elif msg.get("dir") == "child":
                child = int(msg.get("n", 1))
                path = self.cursor + (child,)
                self.doc.resolve(path)
                self.cursor = path
            else:
                raise ProtocolError("move needs a path or dir")
            return self.state()
        if op == "action":
            line = msg.get("action")
            if not isinstance(line, str):
                raise ProtocolError("action op needs an action string")
            la = A.parse_action_line(f"{line} @ {A.format_path(self.cursor)}")
            self.doc.apply_action(la)
            return self.state()
        if op == "step":
            report = self.doc.step()
            extra = {"stepped": report.rule if report else None}
            return self.state(extra)
        if op == "step_at":
            path = tuple(int(i) for i in msg.get("path", []))
            slot = msg.get("slot")
            if slot not in SLOTS:
                raise ProtocolError(f"bad slot {slot!r}")
            n = self.doc.resolve(path)
            report = self.doc.step_at(n, slot)
            return self.state({"stepped": report.rule})
        if op == "run":
            stats = self.doc.run_to_quiescence()
            return self.state({"steps": stats.steps_taken})
        raise ProtocolError(f"unknown op {op!r}")


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        session = Session()
        sock = self.request
        while True:
            try:
                msg = recv_message(sock)
            except (ConnectionError, ProtocolError, json.JSONDecodeError):
                break
            if msg is None:
                break
            reply = session.handle(msg)
            try:
                send_message(sock, reply)
            except ConnectionError:
                break


class SessionServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve(host: str = "127.0.0.1", port: int = 4786, ready=None):
    """Run the session server until interrupted. `ready(actual_port)` is
    called once the socket is listening (used by tests and the web bridge)."""
    server = SessionServer((host, port), _Handler)
    if ready is not None:
        ready(server.server_address[1])
    try:
        server.serve_forever()
    finally:
        server.server_close()


def start_background(host: str = "127.0.0.1", port: int = 0) -> tuple[SessionServer, int]:
    """Start a server on a background thread; returns (server, port)."""
    server = SessionServer((host, port), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, server.server_address[1]
