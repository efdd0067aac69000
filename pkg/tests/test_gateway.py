import base64
import hashlib
import json
import socket
import threading
import time

import pytest

from chamberline.gateway import Gateway, _ws_decode, _ws_encode
from chamberline.sim import SimConfig, SimCore
from helpers import registration_lines


class NdjsonClient:
    def __init__(self, port: int):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=5)
        self.sock.settimeout(5)
        self.buf = b""

    def send(self, obj) -> None:
        self.sock.sendall((json.dumps(obj) + "\n").encode())

    def hello(self) -> None:
        self.sock.sendall(b"\n")

    def read_msg(self) -> dict:
        while b"\n" not in self.buf:
            data = self.sock.recv(65536)
            if not data:
                raise ConnectionError("server closed")
            self.buf += data
        line, self.buf = self.buf.split(b"\n", 1)
        return json.loads(line)

    def read_until(self, pred, tries=200):
        for _ in range(tries):
            msg = self.read_msg()
            if pred(msg):
                return msg
        raise AssertionError("predicate never satisfied")

    def close(self) -> None:
        self.sock.close()


@pytest.fixture
def gw():
    gateway = Gateway(SimConfig(), port=0, start_paused=True)
    gateway.start()
    thread = threading.Thread(target=gateway.run_forever, daemon=True)
    thread.start()
    yield gateway
    gateway.stop()
    thread.join(timeout=5)


@pytest.fixture
def client(gw):
    c = NdjsonClient(gw.port)
    c.hello()
    yield c
    c.close()


class TestSnapshots:
    def test_initial_snapshot_on_connect(self, client):
        snap = client.read_msg()
        assert snap["booth"]["phase"] == "idle"
        assert snap["booth"]["lcd_rows"][0] == "Press * to Start"
        assert snap["queue"]["count"] == 0
        assert snap["link"]["usable"] is True

    def test_key_star_advances_phase(self, client):
        client.read_msg()
        client.send({"key": {"k": "*"}})
        snap = client.read_until(lambda m: m.get("booth", {}).get("phase") == "enter_name")
        assert snap["booth"]["lcd_rows"][0] == "Enter Name:     "

    def test_heartbeat_arrives_while_paused(self, client):
        first = client.read_msg()
        second = client.read_msg()  # heartbeat within 250 ms
        assert second["t_ms"] >= first["t_ms"]

    def test_snapshot_times_non_decreasing(self, client):
        client.send({"step": {"ms": 50}})
        client.send({"step": {"ms": 50}})
        times = [client.read_msg()["t_ms"] for _ in range(6)]
        assert times == sorted(times)


class TestCommands:
    def test_step_advances_exactly(self, client):
        t0 = client.read_msg()["t_ms"]
        client.send({"step": {"ms": 100}})
        snap = client.read_until(lambda m: m["t_ms"] != t0)
        assert snap["t_ms"] == t0 + 100

    def test_malformed_json_reports_line_number(self, client):
        client.read_msg()
        client.sock.sendall(b"this is not json\n")
        msg = client.read_until(lambda m: "error" in m)
        assert msg["line"] == 1

    def test_error_line_counter_counts_messages(self, client):
        client.read_msg()
        client.send({"step": {"ms": 10}})  # message 1, fine
        client.sock.sendall(b"{bad\n")  # message 2, broken
        msg = client.read_until(lambda m: "error" in m)
        assert msg["line"] == 2

    def test_unknown_command_rejected(self, client):
        client.read_msg()
        client.send({"reboot": {}})
        msg = client.read_until(lambda m: "error" in m)
        assert "unknown command" in msg["error"]

    def test_bad_argument_rejected_session_continues(self, client):
        client.read_msg()
        client.send({"set_bpm": {"v": 500}})
        assert "error" in client.read_until(lambda m: "error" in m)
        client.send({"step": {"ms": 10}})
        client.read_until(lambda m: "error" not in m)

    def test_set_link_unusable_then_press(self, client):
        client.read_msg()
        client.send({"set_link": {"f_osc": 1000000, "baud": 38400, "u2x": False}})
        snap = client.read_until(lambda m: m.get("link", {}).get("usable") is False)
        assert snap["link"]["error_pct"] == pytest.approx(-18.62, abs=0.05)
        client.send({"press_next": {}})
        snap = client.read_until(
            lambda m: m.get("doctor", {}).get("lcd_rows", [""])[0].startswith("LINK ERROR")
        )
        assert snap["queue"]["count"] == 0

    def test_power_loss_resets_queue(self, gw, client):
        client.read_msg()
        gw.core.queue.enqueue("A", 30, "01712345678")
        client.send({"step": {"ms": 10}})
        client.read_until(lambda m: m.get("queue", {}).get("count") == 1)
        client.send({"power_loss": {}})
        snap = client.read_until(lambda m: m.get("queue", {}).get("count") == 0)
        assert snap["queue"]["next_serial"] == 1


class TestBatchEquivalence:
    def test_serve_session_matches_batch_run(self, client):
        client.read_msg()
        block, _last = registration_lines(100)
        events = []
        for line in block:
            parts = line.split()
            events.append((int(parts[0]), parts[3].split("=", 1)[1]))

        t = 0
        for when, key in events:
            if when > t:
                client.send({"step": {"ms": when - t}})
                t = when
            client.send({"key": {"k": key}})
        client.send({"step": {"ms": 20000}})
        client.send({"press_next": {}})
        snap = client.read_until(
            lambda m: m.get("doctor", {}).get("lcd_rows", [""])[0].startswith("S1 ")
        )

        core = SimCore(SimConfig())
        for when, key in events:
            core.advance_to(when)
            core.key(key)
        core.advance_to(events[-1][0] + 20000)
        core.press()
        batch = core.snapshot()
        assert snap["doctor"]["lcd_rows"] == batch["doctor"]["lcd_rows"]
        assert snap["booth"]["phase"] == batch["booth"]["phase"]
        assert snap["queue"]["serials"] == batch["queue"]["serials"]
        assert snap["doctor"]["last_latency_ms"] == batch["doctor"]["last_latency_ms"]
        assert snap["doctor"]["last_frame_hex"] == batch["doctor"]["last_frame_hex"]


def ws_mask(payload: bytes, mask: bytes) -> bytes:
    return bytes(b ^ mask[i % 4] for i, b in enumerate(payload))


class TestWebSocket:
    def test_handshake_and_snapshot_frame(self, gw):
        sock = socket.create_connection(("127.0.0.1", gw.port), timeout=5)
        sock.settimeout(5)
        key = base64.b64encode(b"0123456789abcdef").decode()
        request = (
            f"GET / HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\n"
            f"Connection: Upgrade\r\nSec-WebSocket-Key: {key}\r\n"
            f"Sec-WebSocket-Version: 13\r\n\r\n"
        )
        sock.sendall(request.encode())
        buf = b""
        while b"\r\n\r\n" not in buf:
            buf += sock.recv(65536)
        head, buf = buf.split(b"\r\n\r\n", 1)
        assert b"101 Switching Protocols" in head
        expected = base64.b64encode(
            hashlib.sha1((key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11").encode()).digest()
        )
        assert expected in head

        def next_frame():
            nonlocal buf
            while True:
                parsed = _ws_decode(buf)
                if parsed is not None:
                    opcode, payload, buf = parsed
                    return opcode, payload
                buf += sock.recv(65536)

        opcode, payload = next_frame()
        assert opcode == 0x1
        snap = json.loads(payload)
        assert snap["booth"]["phase"] == "idle"

        command = json.dumps({"key": {"k": "*"}}).encode()
        mask = b"\x01\x02\x03\x04"
        frame = bytes([0x81, 0x80 | len(command)]) + mask + ws_mask(command, mask)
        sock.sendall(frame)
        deadline = time.monotonic() + 5
        while time.monotonic() < deadline:
            _, payload = next_frame()
            snap = json.loads(payload)
            if snap["booth"]["phase"] == "enter_name":
                break
        assert snap["booth"]["phase"] == "enter_name"
        sock.sendall(bytes([0x88, 0x80]) + mask)  # masked close, empty payload
        sock.close()

    def test_frame_codec_round_trip(self):
        payload = json.dumps({"hello": 1}).encode()
        opcode, decoded, rest = _ws_decode(_ws_encode(payload))
        assert (opcode, decoded, rest) == (0x1, payload, b"")

    def test_large_frame_length_encoding(self):
        payload = b"x" * 70000
        encoded = _ws_encode(payload)
        assert encoded[1] == 127
        opcode, decoded, rest = _ws_decode(encoded)
        assert decoded == payload and rest == b""
