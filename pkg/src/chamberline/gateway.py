"""Live bridge between the simulation core and interactive clients.

Single-threaded selectors loop.  Clients connect over plain TCP speaking
newline-delimited JSON, or send an HTTP WebSocket upgrade first and get the
same messages inside text frames.  The simulation paces to wall clock while
running; every command, state change, and a 250 ms heartbeat push a full
snapshot to all clients.
"""

from __future__ import annotations

import base64
import hashlib
import json
import selectors
import socket
import time
from typing import Optional

from .booth import KEYS
from .sim import SimConfig, SimCore

HEARTBEAT_S = 0.25
STEP_MAX_MS = 10_000_000

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class CommandError(Exception):
    pass


class _Client:
    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.inbuf = b""
        self.outbuf = b""
        self.mode = "new"  # new | ndjson | ws_handshake | ws
        self.msg_count = 0
        self.closing = False


class Gateway:
    def __init__(
        self,
        config: SimConfig = SimConfig(),
        host: str = "127.0.0.1",
        port: int = 0,
        start_paused: bool = False,
    ):
        self.core = SimCore(config)
        self.host = host
        self.port = port
        self.sel = selectors.DefaultSelector()
        self.clients: dict[socket.socket, _Client] = {}
        self._listener: Optional[socket.socket] = None
        self._paused = start_paused
        self._stop = False
        self._wall_anchor = time.monotonic()
        self._virt_anchor = 0
        self._last_broadcast = 0.0
        self._last_state_key = ""

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind((self.host, self.port))
        listener.listen(16)
        listener.setblocking(False)
        self.port = listener.getsockname()[1]
        self._listener = listener
        self.sel.register(listener, selectors.EVENT_READ, None)
        self._wall_anchor = time.monotonic()
        self._virt_anchor = self.core.t_ms
        print(f"listening on {self.host}:{self.port}", flush=True)

    def stop(self) -> None:
        self._stop = True

    def run_forever(self) -> None:
        if self._listener is None:
            self.start()
        try:
            while not self._stop:
                for key, mask in self.sel.select(0.05):
                    if key.data is None:
                        self._accept()
                    else:
                        self._service(key.data, mask)
                self._pump()
        finally:
            for client in list(self.clients.values()):
                self._drop(client)
            if self._listener is not None:
                self.sel.unregister(self._listener)
                self._listener.close()
            self.sel.close()

    # -- pacing and broadcast --------------------------------------------------

    def _anchor(self) -> None:
        self._wall_anchor = time.monotonic()
        self._virt_anchor = self.core.t_ms

    def _catch_up(self) -> None:
        if self._paused:
            return
        elapsed_ms = int((time.monotonic() - self._wall_anchor) * 1000)
        target = self._virt_anchor + elapsed_ms
        if target > self.core.t_ms:
            self.core.advance_to(target)

    def _state_key(self, snap: dict) -> str:
        return json.dumps({k: v for k, v in snap.items() if k != "t_ms"}, sort_keys=True)

    def _pump(self) -> None:
        self._catch_up()
        snap = self.core.snapshot()
        state_key = self._state_key(snap)
        now = time.monotonic()
        if state_key != self._last_state_key or now - self._last_broadcast >= HEARTBEAT_S:
            self._broadcast(snap)

    def _broadcast(self, snap: dict) -> None:
        line = (json.dumps(snap) + "\n").encode()
        self._last_state_key = self._state_key(snap)
        self._last_broadcast = time.monotonic()
        for client in list(self.clients.values()):
            if client.mode == "ndjson":
                self._send_raw(client, line)
            elif client.mode == "ws":
                self._send_raw(client, _ws_encode(line))

    def _send_snapshot(self, client: _Client) -> None:
        line = (json.dumps(self.core.snapshot()) + "\n").encode()
        if client.mode == "ndjson":
            self._send_raw(client, line)
        elif client.mode == "ws":
            self._send_raw(client, _ws_encode(line))

    # -- socket plumbing ---------------------------------------------------------

    def _accept(self) -> None:
        assert self._listener is not None
        try:
            sock, _addr = self._listener.accept()
        except OSError:
            return
        sock.setblocking(False)
        client = _Client(sock)
        self.clients[sock] = client
        self.sel.register(sock, selectors.EVENT_READ, client)

    def _drop(self, client: _Client) -> None:
        if client.sock in self.clients:
            del self.clients[client.sock]
            self.sel.unregister(client.sock)
            client.sock.close()

    def _want_write(self, client: _Client, want: bool) -> None:
        events = selectors.EVENT_READ | (selectors.EVENT_WRITE if want else 0)
        try:
            self.sel.modify(client.sock, events, client)
        except KeyError:
            pass

    def _send_raw(self, client: _Client, data: bytes) -> None:
        client.outbuf += data
        try:
            sent = client.sock.send(client.outbuf)
            client.outbuf = client.outbuf[sent:]
        except (BlockingIOError, InterruptedError):
            pass
        except OSError:
            self._drop(client)
            return
        if client.outbuf and not client.closing:
            self._want_write(client, True)
        elif client.closing and not client.outbuf:
            self._drop(client)

    def _service(self, client: _Client, mask: int) -> None:
        if mask & selectors.EVENT_WRITE:
            if client.outbuf:
                try:
                    sent = client.sock.send(client.outbuf)
                    client.outbuf = client.outbuf[sent:]
                except (BlockingIOError, InterruptedError):
                    pass
                except OSError:
                    self._drop(client)
                    return
            if not client.outbuf:
                if client.closing:
                    self._drop(client)
                    return
                self._want_write(client, False)
        if mask & selectors.EVENT_READ:
            try:
                data = client.sock.recv(65536)
            except (BlockingIOError, InterruptedError):
                return
            except OSError:
                self._drop(client)
                return
            if not data:
                self._drop(client)
                return
            client.inbuf += data
            self._ingest(client)

    # -- protocol ---------------------------------------------------------------

    def _ingest(self, client: _Client) -> None:
        if client.mode == "new":
            if len(client.inbuf) < 4 and b"\n" not in client.inbuf:
                return
            if client.inbuf.startswith(b"GET "):
                client.mode = "ws_handshake"
            else:
                client.mode = "ndjson"
                self._send_snapshot(client)
        if client.mode == "ws_handshake":
            self._handshake(client)
        if client.mode == "ndjson":
            while b"\n" in client.inbuf:
                line, client.inbuf = client.inbuf.split(b"\n", 1)
                if line.strip():
                    self._handle_line(client, line)
        elif client.mode == "ws":
            self._drain_ws(client)

    def _handshake(self, client: _Client) -> None:
        if b"\r\n\r\n" not in client.inbuf:
            return
        head, client.inbuf = client.inbuf.split(b"\r\n\r\n", 1)
        key = ""
        upgrade = False
        for raw in head.split(b"\r\n")[1:]:
            name, _, value = raw.partition(b":")
            name = name.strip().lower()
            if name == b"sec-websocket-key":
                key = value.strip().decode("ascii", "replace")
            elif name == b"upgrade" and b"websocket" in value.lower():
                upgrade = True
        if not upgrade or not key:
            client.outbuf += b"HTTP/1.1 400 Bad Request\r\nConnection: close\r\n\r\n"
            client.closing = True
            self._send_raw(client, b"")
            return
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
        ).decode("ascii")
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
        ).encode("ascii")
        client.mode = "ws"
        self._send_raw(client, response)
        self._send_snapshot(client)

    def _drain_ws(self, client: _Client) -> None:
        while True:
            parsed = _ws_decode(client.inbuf)
            if parsed is None:
                return
            opcode, payload, client.inbuf = parsed
            if opcode == 0x8:
                self._send_raw(client, _ws_encode(payload, opcode=0x8))
                client.closing = True
                return
            if opcode == 0x9:
                self._send_raw(client, _ws_encode(payload, opcode=0xA))
            elif opcode in (0x1, 0x2):
                for line in payload.splitlines():
                    if line.strip():
                        self._handle_line(client, line)

    def _handle_line(self, client: _Client, line: bytes) -> None:
        client.msg_count += 1
        try:
            try:
                obj = json.loads(line)
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise CommandError(f"bad json: {exc}") from None
            self._apply_command(obj)
        except CommandError as exc:
            error = json.dumps({"error": str(exc), "line": client.msg_count}) + "\n"
            payload = error.encode()
            if client.mode == "ws":
                payload = _ws_encode(payload)
            self._send_raw(client, payload)
            return
        self._broadcast(self.core.snapshot())

    def _apply_command(self, obj: object) -> None:
        if not isinstance(obj, dict) or len(obj) != 1:
            raise CommandError("expected an object with exactly one command")
        ((name, args),) = obj.items()
        if not isinstance(args, dict):
            raise CommandError(f"{name}: arguments must be an object")
        self._catch_up()
        if name == "key":
            k = args.get("k")
            if not isinstance(k, str) or k not in KEYS:
                raise CommandError(f"key: k must be one of 0-9 A-D * #, got {k!r}")
            self.core.key(k)
        elif name == "press_next":
            self.core.press()
        elif name == "power_loss":
            self.core.power_loss()
        elif name == "set_temp_c":
            v = args.get("v")
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not 0.0 <= v <= 99.9:
                raise CommandError(f"set_temp_c: v must be a number in [0, 99.9], got {v!r}")
            self.core.set_truth_temp_c(float(v))
        elif name == "set_bpm":
            v = args.get("v")
            if not isinstance(v, int) or isinstance(v, bool) or not 20 <= v <= 250:
                raise CommandError(f"set_bpm: v must be an integer in [20, 250], got {v!r}")
            self.core.set_truth_bpm(v)
        elif name == "finger":
            on = args.get("on")
            if not isinstance(on, bool):
                raise CommandError(f"finger: on must be a boolean, got {on!r}")
            self.core.set_finger(on)
        elif name == "pause":
            self._catch_up()
            self._paused = True
        elif name == "resume":
            self._paused = False
            self._anchor()
        elif name == "step":
            ms = args.get("ms")
            if not isinstance(ms, int) or isinstance(ms, bool) or not 1 <= ms <= STEP_MAX_MS:
                raise CommandError(f"step: ms must be an integer in [1, {STEP_MAX_MS}], got {ms!r}")
            self.core.advance_to(self.core.t_ms + ms)
            self._anchor()
        elif name == "set_link":
            f_osc = args.get("f_osc")
            baud = args.get("baud")
            u2x = args.get("u2x", False)
            if not isinstance(f_osc, int) or f_osc < 1:
                raise CommandError(f"set_link: f_osc must be a positive integer, got {f_osc!r}")
            if not isinstance(baud, int) or baud < 1:
                raise CommandError(f"set_link: baud must be a positive integer, got {baud!r}")
            if not isinstance(u2x, bool):
                raise CommandError(f"set_link: u2x must be a boolean, got {u2x!r}")
            self.core.set_link(f_osc, baud, u2x)
        else:
            raise CommandError(f"unknown command {name!r}")


def _ws_encode(payload: bytes, opcode: int = 0x1) -> bytes:
    header = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        header += bytes([n])
    elif n < 65536:
        header += bytes([126]) + n.to_bytes(2, "big")
    else:
        header += bytes([127]) + n.to_bytes(8, "big")
    return header + payload


def _ws_decode(buf: bytes) -> Optional[tuple[int, bytes, bytes]]:
    """One frame from buf -> (opcode, unmasked payload, rest), or None if short."""
    if len(buf) < 2:
        return None
    opcode = buf[0] & 0x0F
    masked = bool(buf[1] & 0x80)
    length = buf[1] & 0x7F
    idx = 2
    if length == 126:
        if len(buf) < 4:
            return None
        length = int.from_bytes(buf[2:4], "big")
        idx = 4
    elif length == 127:
        if len(buf) < 10:
            return None
        length = int.from_bytes(buf[2:10], "big")
        idx = 10
    mask = b""
    if masked:
        if len(buf) < idx + 4:
            return None
        mask = buf[idx : idx + 4]
        idx += 4
    if len(buf) < idx + length:
        return None
    payload = buf[idx : idx + length]
    if mask:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return opcode, payload, buf[idx + length :]


def serve(
    config: SimConfig = SimConfig(),
    host: str = "127.0.0.1",
    port: int = 0,
    start_paused: bool = False,
) -> None:
    gateway = Gateway(config, host, port, start_paused)
    gateway.start()
    try:
        gateway.run_forever()
    except KeyboardInterrupt:
        pass
