import json
import socket

import pytest

from incmark import syntax as S
from incmark.cli import main
from incmark.oracle import mark_program
from incmark.server import recv_message, send_message, start_background

TRACE_LINES = """\
insert-var x @ .
wrap-ap one @ .
insert-num 1 @ 2
wrap-fun @ .
set-ann (arrow bool num) @ .
insert-binder x @ .
"""

GOLDEN = "(lam x (arrow bool num) (ap (var x) (num 1)))"


@pytest.fixture()
def files(tmp_path):
    hole = tmp_path / "hole.imk"
    hole.write_text("?\n")
    bad = tmp_path / "bad.imk"
    bad.write_text("(ap (num 1) (var x))\n")
    trace = tmp_path / "trace.imk"
    trace.write_text(TRACE_LINES)
    return tmp_path, hole, bad, trace


def test_check_exit_codes(files, capsys):
    _, hole, bad, _ = files
    assert main(["check", str(hole)]) == 0
    out = capsys.readouterr().out
    assert "errors: 0" in out
    assert main(["check", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "errors: 2" in out
    assert main(["check", str(bad) + ".missing"]) == 2


def test_check_agrees_with_marking(files, capsys):
    tmp, _, _, _ = files
    f = tmp / "golden.imk"
    f.write_text(GOLDEN)
    code = main(["check", str(f)])
    out = capsys.readouterr().out
    tree_line = out.splitlines()[0]
    assert S.parse_decorated(tree_line) == mark_program(S.parse_expr(GOLDEN))
    assert code == 1


def test_trace_replays_to_quiescent_golden(files, capsys):
    _, _, _, trace = files
    assert main(["trace", str(trace)]) == 0
    out = capsys.readouterr().out
    tree = S.parse_decorated(out.splitlines()[0])
    assert S.erase(tree) == S.parse_expr(GOLDEN)
    assert S.is_quiescent(tree)
    assert tree == mark_program(S.parse_expr(GOLDEN))


def test_trace_modes_agree(files, capsys):
    _, _, _, trace = files
    main(["trace", str(trace), "--step-mode", "eager"])
    eager = capsys.readouterr().out.splitlines()[0]
    main(["trace", str(trace), "--step-mode", "per-action"])
    per_action = capsys.readouterr().out.splitlines()[0]
    assert eager == per_action


def test_trace_empty_is_identity(files, capsys):
    tmp, _, _, _ = files
    empty = tmp / "empty.imk"
    empty.write_text("")
    assert main(["trace", str(empty)]) == 0
    out = capsys.readouterr().out
    assert S.parse_decorated(out.splitlines()[0]) == mark_program(S.HOLE)


def test_trace_reports_bad_action_line(files, capsys):
    tmp, _, _, _ = files
    bad = tmp / "badtrace.imk"
    bad.write_text("insert-var x @ .\ninsert-var y @ .\n")  # second is inapplicable
    assert main(["trace", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "action 2" in err


def test_bench_cli_smoke(files, capsys, tmp_path):
    out_file = tmp_path / "bench.csv"
    assert main(["bench", "--layers", "1", "--edits", "2", "--seed", "1",
                 "--out", str(out_file)]) == 0
    text = out_file.read_text()
    assert text.startswith("edit_kind,")
    assert "# total_speedup=" in text


class Client:
    def __init__(self, port):
        self.sock = socket.create_connection(("127.0.0.1", port))

    def rpc(self, **msg):
        send_message(self.sock, msg)
        return recv_message(self.sock)

    def close(self):
        self.sock.close()


@pytest.fixture(scope="module")
def server():
    srv, port = start_background()
    yield port
    srv.shutdown()


def test_server_session_worked_example(server):
    c = Client(server)
    r = c.rpc(op="open")
    assert r["ok"] and r["revision"] == 0 and r["quiescent"]
    assert S.parse_decorated(r["tree"]) == mark_program(S.HOLE)
    r = c.rpc(op="action", action="insert-var x")
    assert r["errors"] == 1  # free variable
    assert len(r["dirty"]) == 2
    r = c.rpc(op="step")
    assert r["stepped"] == "step-ana"
    r = c.rpc(op="step")
    assert r["stepped"] == "top-step" and r["quiescent"]
    r = c.rpc(op="step")
    assert r["stepped"] is None
    c.close()


def test_server_protocol_errors_keep_session(server):
    c = Client(server)
    c.rpc(op="open")
    r = c.rpc(op="action", action="delete-binder")
    assert not r["ok"] and "ActionInapplicable" in r["error"]
    r = c.rpc(op="bogus")
    assert not r["ok"]
    r = c.rpc(op="state")
    assert r["ok"] and r["revision"] == 0
    c.close()


def test_server_replay_reproduces_state(server):
    log = [dict(op="open"),
           dict(op="action", action="insert-var x"),
           dict(op="action", action="wrap-ap one"),
           dict(op="move", path=[2]),
           dict(op="action", action="insert-num 1"),
           dict(op="run")]
    finals = []
    for _ in range(2):
        c = Client(server)
        last = None
        for msg in log:
            last = c.rpc(**msg)
        finals.append(last)
        c.close()
    assert finals[0] == finals[1]


def test_server_cursor_moves(server):
    c = Client(server)
    c.rpc(op="open", program="(ap (var x) ?)")
    r = c.rpc(op="move", path=[1])
    assert r["cursor"] == [1]
    r = c.rpc(op="move", dir="up")
    assert r["cursor"] == []
    r = c.rpc(op="move", dir="child", n=2)
    assert r["cursor"] == [2]
    r = c.rpc(op="move", path=[9])
    assert not r["ok"]
    c.close()


def test_websocket_bridge_smoke():
    import base64
    import os
    import struct

    from incmark.web import start_background_web, ws_accept_key
    srv, port = start_background_web()
    try:
        s = socket.create_connection(("127.0.0.1", port))
        key = base64.b64encode(os.urandom(16)).decode()
        s.sendall((f"GET /ws HTTP/1.1\r\nHost: t\r\nUpgrade: websocket\r\n"
                   f"Connection: Upgrade\r\nSec-WebSocket-Key: {key}\r\n"
                   f"Sec-WebSocket-Version: 13\r\n\r\n").encode())
        resp = s.recv(4096).decode()
        assert "101" in resp and ws_accept_key(key) in resp

        def send_text(payload: bytes):
            mask = os.urandom(4)
            body = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            assert len(payload) < 126
            s.sendall(bytes([0x81, 0x80 | len(payload)]) + mask + body)

        def recv_text():
            head = s.recv(2)
            ln = head[1] & 0x7F
            if ln == 126:
                ln = struct.unpack(">H", s.recv(2))[0]
            buf = b""
            while len(buf) < ln:
                buf += s.recv(ln - len(buf))
            return json.loads(buf)

        send_text(json.dumps({"op": "open"}).encode())
        r = recv_text()
        assert r["ok"] and r["tree"].startswith("(?")
        send_text(json.dumps({"op": "action", "action": "insert-num 5"}).encode())
        r = recv_text()
        assert r["ok"] and len(r["dirty"]) == 2
        s.close()
    finally:
        srv.shutdown()
