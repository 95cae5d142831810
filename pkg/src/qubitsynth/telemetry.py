"""Telemetry and remote control over local sockets.

Outbound: one JSON-encoded snapshot per tick, newline-delimited, broadcast
to every connected client. Inbound: JSON control messages routed into the
session's control queue. A stalled client can never block the instrument:
each client has a bounded outbound buffer with drop-oldest behavior and its
own sender thread.

Two listeners speak the same payloads: a raw TCP socket (newline-delimited
JSON, trivially scriptable) and an optional WebSocket port, because browser
pages cannot open raw TCP. The WebSocket side is a minimal RFC 6455 server
(text frames, ping/pong, close) plus a tiny static file handler so the
companion UI can be served from the same port.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import socket
import struct
import threading
import time
from collections import deque
from pathlib import Path
from typing import Callable

from .engine import TelemetrySnapshot

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def snapshot_to_dict(snapshot: TelemetrySnapshot) -> dict:
    """Wire form of a snapshot; schema carries a version field."""
    last = snapshot.last_measurement
    last_dict = None
    if last is not None:
        last_dict = {
            "time": last.time,
            "basis": last.outcome.basis.value,
            "bit": last.outcome.bit,
            "pre_probability": last.outcome.pre_probability,
        }
        if last.string is not None:
            last_dict["string"] = last.string
    return {
        "v": SCHEMA_VERSION,
        "time": snapshot.time,
        "bloch": {"x": snapshot.bloch.x, "y": snapshot.bloch.y, "z": snapshot.bloch.z},
        "bus_gains": {
            "classical": snapshot.classical_gain,
            "quantum": snapshot.quantum_gain,
        },
        "active_notes": [
            {"string": string, "note": note, "bend": bend}
            for string, note, bend in snapshot.active_notes
        ],
        "last_measurement": last_dict,
        "axis": snapshot.selected_axis.value,
    }


class _Client:
    """One connected listener with a bounded, drop-oldest outbound buffer."""

    def __init__(self, sock: socket.socket, is_websocket: bool, queue_limit: int):
        self.sock = sock
        self.is_websocket = is_websocket
        self.queue: deque[str] = deque(maxlen=queue_limit)
        self.ready = threading.Condition()
        self.closed = False

    def enqueue(self, line: str) -> None:
        with self.ready:
            self.queue.append(line)  # deque maxlen drops the oldest entry
            self.ready.notify()

    def close(self) -> None:
        with self.ready:
            self.closed = True
            self.ready.notify()
        try:
            self.sock.shutdown(socket.SHUT_RDWR)  # wakes a blocked recv
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


def _ws_encode_text(payload: bytes) -> bytes:
    length = len(payload)
    if length < 126:
        header = struct.pack("!BB", 0x81, length)
    elif length < 65536:
        header = struct.pack("!BBH", 0x81, 126, length)
    else:
        header = struct.pack("!BBQ", 0x81, 127, length)
    return header + payload


def _ws_read_exact(sock: socket.socket, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


def _ws_read_frame(sock: socket.socket) -> tuple[int, bytes] | None:
    head = _ws_read_exact(sock, 2)
    if head is None:
        return None
    fin_opcode, mask_len = head
    opcode = fin_opcode & 0x0F
    masked = bool(mask_len & 0x80)
    length = mask_len & 0x7F
    if length == 126:
        ext = _ws_read_exact(sock, 2)
        if ext is None:
            return None
        length = struct.unpack("!H", ext)[0]
    elif length == 127:
        ext = _ws_read_exact(sock, 8)
        if ext is None:
            return None
        length = struct.unpack("!Q", ext)[0]
    mask = b"\x00" * 4
    if masked:
        mask_bytes = _ws_read_exact(sock, 4)
        if mask_bytes is None:
            return None
        mask = mask_bytes
    payload = _ws_read_exact(sock, length) if length else b""
    if payload is None:
        return None
    if masked:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return opcode, payload


class TelemetryServer:
    """Broadcasts snapshots at a fixed rate and feeds control messages back.

    snapshot_fn returns the latest wire dict (or None before the first
    block); control_sink receives each decoded inbound message and may raise
    ValueError to reject it, which is counted, logged, and otherwise ignored.
    """

    def __init__(
        self,
        snapshot_fn: Callable[[], dict | None],
        control_sink: Callable[[dict], None],
        host: str = "127.0.0.1",
        port: int = 0,
        ws_port: int | None = None,
        rate_hz: float = 30.0,
        queue_limit: int = 64,
        static_dir: str | Path | None = None,
    ):
        self._snapshot_fn = snapshot_fn
        self._control_sink = control_sink
        self._host = host
        self._requested_port = port
        self._requested_ws_port = ws_port
        self._rate_hz = rate_hz
        self._queue_limit = queue_limit
        self._static_dir = Path(static_dir) if static_dir else None
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._threads: list[threading.Thread] = []
        self._stop = threading.Event()
        self._listener: socket.socket | None = None
        self._ws_listener: socket.socket | None = None
        self.malformed_count = 0

    @property
    def port(self) -> int:
        assert self._listener is not None, "server not started"
        return self._listener.getsockname()[1]

    @property
    def ws_port(self) -> int | None:
        if self._ws_listener is None:
            return None
        return self._ws_listener.getsockname()[1]

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        self._listener = self._bind(self._requested_port)
        self._spawn(self._accept_loop, self._listener, False)
        if self._requested_ws_port is not None:
            self._ws_listener = self._bind(self._requested_ws_port)
            self._spawn(self._accept_loop, self._ws_listener, True)
        self._spawn(self._broadcast_loop)

    def stop(self) -> None:
        self._stop.set()
        for listener in (self._listener, self._ws_listener):
            if listener is not None:
                try:
                    listener.close()
                except OSError:
                    pass
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            client.close()
        for thread in self._threads:
            thread.join(timeout=2.0)

    def _bind(self, port: int) -> socket.socket:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((self._host, port))
        sock.listen(8)
        sock.settimeout(0.25)  # lets the accept loop notice shutdown
        return sock

    def _spawn(self, target, *args) -> None:
        thread = threading.Thread(target=target, args=args, daemon=True)
        thread.start()
        self._threads.append(thread)

    # -- broadcast ------------------------------------------------------------

    def _broadcast_loop(self) -> None:
        interval = 1.0 / self._rate_hz
        next_tick = time.monotonic()
        while not self._stop.is_set():
            payload = self._snapshot_fn()
            if payload is not None:
                line = json.dumps(payload) + "\n"
                with self._clients_lock:
                    clients = list(self._clients)
                for client in clients:
                    client.enqueue(line)
            next_tick += interval
            delay = next_tick - time.monotonic()
            if delay > 0:
                self._stop.wait(delay)
            else:
                next_tick = time.monotonic()  # fell behind; don't burst

    # -- client handling -------------------------------------------------------

    def _accept_loop(self, listener: socket.socket, is_websocket: bool) -> None:
        while not self._stop.is_set():
            try:
                sock, _ = listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            sock.settimeout(None)
            self._spawn(self._client_setup, sock, is_websocket)

    def _client_setup(self, sock: socket.socket, is_websocket: bool) -> None:
        if is_websocket and not self._ws_handshake(sock):
            return
        client = _Client(sock, is_websocket, self._queue_limit)
        with self._clients_lock:
            self._clients.append(client)
        self._spawn(self._sender_loop, client)
        if is_websocket:
            self._ws_reader_loop(client)
        else:
            self._raw_reader_loop(client)

    def _drop(self, client: _Client) -> None:
        with self._clients_lock:
            if client in self._clients:
                self._clients.remove(client)
        client.close()

    def _sender_loop(self, client: _Client) -> None:
        while True:
            with client.ready:
                while not client.queue and not client.closed:
                    client.ready.wait(timeout=0.5)
                    if self._stop.is_set():
                        return
                if client.closed:
                    return
                line = client.queue.popleft()
            try:
                if client.is_websocket:
                    client.sock.sendall(_ws_encode_text(line.rstrip("\n").encode()))
                else:
                    client.sock.sendall(line.encode())
            except OSError:
                self._drop(client)
                return

    def _handle_inbound(self, text: str) -> None:
        try:
            message = json.loads(text)
            if not isinstance(message, dict):
                raise ValueError("control message must be a JSON object")
            self._control_sink(message)
        except ValueError as exc:
            self.malformed_count += 1
            log.warning("ignoring malformed control message: %s", exc)

    def _raw_reader_loop(self, client: _Client) -> None:
        reader = client.sock.makefile("rb")
        try:
            for raw in reader:
                if self._stop.is_set():
                    break
                text = raw.strip().decode("utf-8", errors="replace")
                if text:
                    self._handle_inbound(text)
        except OSError:
            pass
        finally:
            self._drop(client)

    def _ws_reader_loop(self, client: _Client) -> None:
        buffer = b""
        try:
            while not self._stop.is_set():
                frame = _ws_read_frame(client.sock)
                if frame is None:
                    break
                opcode, payload = frame
                if opcode == 0x1:
                    buffer = payload
                elif opcode == 0x0:  # continuation
                    buffer += payload
                    continue
                elif opcode == 0x8:  # close
                    try:
                        client.sock.sendall(struct.pack("!BB", 0x88, 0))
                    except OSError:
                        pass
                    break
                elif opcode == 0x9:  # ping -> pong
                    client.sock.sendall(struct.pack("!BB", 0x8A, len(payload)) + payload)
                    continue
                else:
                    continue
                text = buffer.decode("utf-8", errors="replace").strip()
                if text:
                    self._handle_inbound(text)
        except OSError:
            pass
        finally:
            self._drop(client)

    # -- websocket handshake and static files -----------------------------------

    def _ws_handshake(self, sock: socket.socket) -> bool:
        sock.settimeout(5.0)
        try:
            request = b""
            while b"\r\n\r\n" not in request:
                chunk = sock.recv(4096)
                if not chunk:
                    sock.close()
                    return False
                request += chunk
                if len(request) > 65536:
                    sock.close()
                    return False
            head = request.split(b"\r\n\r\n", 1)[0].decode("latin-1")
            lines = head.split("\r\n")
            target = lines[0].split(" ")[1] if len(lines[0].split(" ")) > 1 else "/"
            headers = {}
            for line in lines[1:]:
                if ":" in line:
                    name, value = line.split(":", 1)
                    headers[name.strip().lower()] = value.strip()
            if headers.get("upgrade", "").lower() != "websocket":
                self._serve_static(sock, target)
                return False
            key = headers.get("sec-websocket-key", "")
            accept = base64.b64encode(
                hashlib.sha1((key + _WS_GUID).encode()).digest()
            ).decode()
            sock.sendall(
                (
                    "HTTP/1.1 101 Switching Protocols\r\n"
                    "Upgrade: websocket\r\n"
                    "Connection: Upgrade\r\n"
                    f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
                ).encode()
            )
            sock.settimeout(None)
            return True
        except OSError:
            try:
                sock.close()
            except OSError:
                pass
            return False

    def _serve_static(self, sock: socket.socket, target: str) -> None:
        try:
            status, body, content_type = self._static_response(target)
            sock.sendall(
                (
                    f"HTTP/1.1 {status}\r\n"
                    f"Content-Type: {content_type}\r\n"
                    f"Content-Length: {len(body)}\r\n"
                    "Connection: close\r\n\r\n"
                ).encode()
                + body
            )
        except OSError:
            pass
        finally:
            try:
                sock.close()
            except OSError:
                pass

    def _static_response(self, target: str) -> tuple[str, bytes, str]:
        if self._static_dir is None:
            return "404 Not Found", b"telemetry websocket endpoint\n", "text/plain"
        name = target.split("?")[0].lstrip("/") or "index.html"
        root = self._static_dir.resolve()
        candidate = (root / name).resolve()
        if not candidate.is_relative_to(root) or not candidate.is_file():
            return "404 Not Found", b"not found\n", "text/plain"
        content_type = _CONTENT_TYPES.get(candidate.suffix, "application/octet-stream")
        return "200 OK", candidate.read_bytes(), content_type
