"""Browser bridge for the workbench: serves the static frontend and exposes
the session protocol over WebSocket (text frames carrying the same JSON
objects as the TCP transport).

The WebSocket side is a minimal RFC 6455 server implementation (handshake,
masked client frames, unfragmented text, ping/pong, close) so the bridge has
no dependencies outside the standard library.
"""

from __future__ import annotations

import base64
import hashlib
import json
import socket
import socketserver
import struct
from pathlib import Path

from .server import Session

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
STATIC_DIR = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
INDEX_DIR = Path(__file__).resolve().parent.parent.parent / "frontend"

CONTENT_TYPES = {".html": "text/html", ".js": "text/javascript",
                 ".css": "text/css", ".map": "application/json"}


def _http_response(status: str, headers: dict, body: bytes = b"") -> bytes:
    lines = [f"HTTP/1.1 {status}"]
    headers.setdefault("Content-Length", str(len(body)))
    headers.setdefault("Connection", "close")
    lines += [f"{k}: {v}" for k, v in headers.items()]
    return ("\r\n".join(lines) + "\r\n\r\n").encode() + body


def read_ws_frame(sock: socket.socket):
    """Returns (opcode, payload) or None on a closed socket."""
    head = _recv_exact(sock, 2)
    if head is None:
        return None
    fin_op, len7 = head
    opcode = fin_op & 0x0F
    masked = len7 & 0x80
    length = len7 & 0x7F
    if length == 126:
        (length,) = struct.unpack(">H", _recv_exact(sock, 2))
    elif length == 127:
        (length,) = struct.unpack(">Q", _recv_exact(sock, 8))
    mask = _recv_exact(sock, 4) if masked else b"\0\0\0\0"
    payload = _recv_exact(sock, length) if length else b""
    if payload is None:
        return None
    if masked:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return opcode, payload


def write_ws_frame(sock: socket.socket, payload: bytes, opcode: int = 0x1) -> None:
    header = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        header += bytes([n])
    elif n < 1 << 16:
        header += bytes([126]) + struct.pack(">H", n)
    else:
        header += bytes([127]) + struct.pack(">Q", n)
    sock.sendall(header + payload)


def _recv_exact(sock, n):
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


def ws_accept_key(key: str) -> str:
    digest = hashlib.sha1((key + WS_GUID).encode()).digest()
    return base64.b64encode(digest).decode()


class _WebHandler(socketserver.BaseRequestHandler):
    def handle(self):
        sock = self.request
        request = b""
        while b"\r\n\r\n" not in request:
            chunk = sock.recv(4096)
            if not chunk:
                return
            request += chunk
        head = request.split(b"\r\n\r\n", 1)[0].decode("latin-1")
        lines = head.split("\r\n")
        try:
            method, path, _ = lines[0].split(" ", 2)
        except ValueError:
            return
        headers = {}
        for line in lines[1:]:
            if ":" in line:
                k, v = line.split(":", 1)
                headers[k.strip().lower()] = v.strip()
        if headers.get("upgrade", "").lower() == "websocket":
            self._websocket(sock, headers)
        elif method == "GET":
            self._static(sock, path)

    def _static(self, sock, path):
        name = "index.html" if path in ("/", "") else path.lstrip("/")
        for base in (INDEX_DIR, STATIC_DIR):
            candidate = (base / name).resolve()
            try:
                candidate.relative_to(base.resolve())
            except ValueError:
                continue
            if candidate.is_file():
                ctype = CONTENT_TYPES.get(candidate.suffix, "application/octet-stream")
                sock.sendall(_http_response("200 OK", {"Content-Type": ctype},
                                            candidate.read_bytes()))
                return
        sock.sendall(_http_response("404 Not Found", {"Content-Type": "text/plain"},
                                    b"not found"))

    def _websocket(self, sock, headers):
        key = headers.get("sec-websocket-key")
        if not key:
            sock.sendall(_http_response("400 Bad Request", {}))
            return
        sock.sendall(
            ("HTTP/1.1 101 Switching Protocols\r\n"
             "Upgrade: websocket\r\n"
             "Connection: Upgrade\r\n"
             f"Sec-WebSocket-Accept: {ws_accept_key(key)}\r\n\r\n").encode())
        session = Session()
        while True:
            frame = read_ws_frame(sock)
            if frame is None:
                return
            opcode, payload = frame
            if opcode == 0x8:  # close
                write_ws_frame(sock, payload, 0x8)
                return
            if opcode == 0x9:  # ping
                write_ws_frame(sock, payload, 0xA)
                continue
            if opcode not in (0x1, 0x2):
                continue
            try:
                msg = json.loads(payload.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                reply = {"ok": False, "error": "ProtocolError: bad JSON"}
            else:
                reply = session.handle(msg)
            write_ws_frame(sock, json.dumps(reply, separators=(",", ":")).encode())


class WebServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve_web(host: str = "127.0.0.1", port: int = 8350, ready=None):
    server = WebServer((host, port), _WebHandler)
    if ready is not None:
        ready(server.server_address[1])
    try:
        server.serve_forever()
    finally:
        server.server_close()


def start_background_web(host: str = "127.0.0.1", port: int = 0):
    import threading
    server = WebServer((host, port), _WebHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, server.server_address[1]
