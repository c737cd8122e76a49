"""Client-side network interface console.

A QNIC endpoint is the subscriber's window onto a running
instantiation: a line-oriented serial protocol for count and status
queries, and a broadcast feed of detection events for electronics that
want the raw pulses. Scope is enforced at the endpoint: only the
subscriber's own detector channels and coincidence pairs answer.

Serial grammar (newline-terminated ASCII, case-sensitive):
    SING? <ch>     ->  SING <ch> <n>
    COIN? <pairId> ->  COIN <pairId> <n>
    STAT?          ->  STAT <state>
    WIN?           ->  WIN <ps>
Anything else answers ERR 01 SYNTAX; out-of-scope ids answer
ERR 02 SCOPE. Serial devices do not throw, so errors stay in-band.

Signal frames are the 11-byte binary tag record prefixed by a u32
little-endian length, suitable for streaming over a raw socket.
"""

from __future__ import annotations

import socketserver
import struct
import threading
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import tags as tagmod
from .errors import E_SCOPE, EmulatorError
from .timing import DEFAULT_WINDOW_PS, CountRecord

MAX_LINE_BYTES = 256
ERR_SYNTAX = "ERR 01 SYNTAX"
ERR_SCOPE = "ERR 02 SCOPE"


class SignalBroadcast:
    """Append-only detection-event log with independent consumer cursors."""

    def __init__(self):
        self._events: list[tuple[int, bytes]] = []  # (channel, record bytes)
        self._lock = threading.Lock()

    def publish(self, tag_records: np.ndarray) -> int:
        payload = tagmod.encode_tags(tag_records)
        channels = np.asarray(tag_records["channel"]) if len(tag_records) else []
        rows = [
            payload[i * tagmod.RECORD_BYTES : (i + 1) * tagmod.RECORD_BYTES]
            for i in range(len(tag_records))
        ]
        with self._lock:
            for ch, row in zip(channels, rows):
                self._events.append((int(ch), row))
            return len(self._events)

    def snapshot(self, start: int) -> list[tuple[int, bytes]]:
        with self._lock:
            return self._events[start:]


class SignalSubscription:
    """Single-channel cursor over a broadcast; each event is seen once."""

    def __init__(self, broadcast: SignalBroadcast, channel: int):
        self._broadcast = broadcast
        self.channel = channel
        self._pos = 0

    def take_frames(self) -> list[bytes]:
        events = self._broadcast.snapshot(self._pos)
        self._pos += len(events)
        return [
            struct.pack("<I", tagmod.RECORD_BYTES) + row
            for ch, row in events
            if ch == self.channel
        ]

    def take(self) -> np.ndarray:
        frames = self.take_frames()
        return tagmod.decode_tags(b"".join(f[4:] for f in frames))


def parse_frames(buf: bytes) -> tuple[np.ndarray, bytes]:
    """Split a frame stream into tag records plus any trailing partial."""
    records = b""
    pos = 0
    while pos + 4 <= len(buf):
        (length,) = struct.unpack_from("<I", buf, pos)
        if pos + 4 + length > len(buf):
            break
        records += buf[pos + 4 : pos + 4 + length]
        pos += 4 + length
    return tagmod.decode_tags(records), buf[pos:]


@dataclass
class QnicEndpoint:
    """One subscriber's console binding for a single instantiation."""

    node_id: str
    channels: frozenset
    pairs: tuple
    window_ps: int = DEFAULT_WINDOW_PS
    state: str = "PENDING"
    _singles: dict = field(default_factory=dict)
    _coincidences: dict = field(default_factory=dict)
    _broadcast: SignalBroadcast = field(default_factory=SignalBroadcast)
    records_seen: int = 0

    def ingest(self, record: CountRecord) -> None:
        """Fold one count record into the cumulative totals."""
        for ch, n in record.singles.items():
            if ch in self.channels:
                self._singles[ch] = self._singles.get(ch, 0) + int(n)
        for pair, n in record.coincidences.items():
            self._coincidences[pair] = self._coincidences.get(pair, 0) + int(n)
        self.records_seen += 1

    def publish_signal(self, tag_records: np.ndarray) -> int:
        owned = tag_records[np.isin(tag_records["channel"], list(self.channels))]
        return self._broadcast.publish(owned)

    def subscribe_signal(self, channel: int) -> SignalSubscription:
        if channel not in self.channels:
            raise EmulatorError(E_SCOPE, f"channel {channel} not in subscriber scope")
        return SignalSubscription(self._broadcast, channel)

    def handle_count_query(self, line) -> str:
        if isinstance(line, bytes):
            try:
                line = line.decode("ascii")
            except UnicodeDecodeError:
                return ERR_SYNTAX
        line = line.rstrip("\r\n")
        if len(line) > MAX_LINE_BYTES:
            return ERR_SYNTAX
        tokens = line.split()
        if tokens == ["STAT?"]:
            return f"STAT {self.state.upper()}"
        if tokens == ["WIN?"]:
            return f"WIN {self.window_ps}"
        if len(tokens) == 2 and tokens[0] == "SING?":
            ch = _parse_int(tokens[1])
            if ch is None:
                return ERR_SYNTAX
            if ch not in self.channels:
                return ERR_SCOPE
            return f"SING {ch} {self._singles.get(ch, 0)}"
        if len(tokens) == 2 and tokens[0] == "COIN?":
            pid = _parse_int(tokens[1])
            if pid is None:
                return ERR_SYNTAX
            if not 0 <= pid < len(self.pairs):
                return ERR_SCOPE
            return f"COIN {pid} {self._coincidences.get(tuple(self.pairs[pid]), 0)}"
        return ERR_SYNTAX


def _parse_int(token: str) -> Optional[int]:
    if not token.isdigit():
        return None
    return int(token)


def subscribe_signal(endpoint: QnicEndpoint, channel: int) -> SignalSubscription:
    return endpoint.subscribe_signal(channel)


class _SerialHandler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            resp = self.server.endpoint.handle_count_query(raw)
            self.wfile.write(resp.encode("ascii") + b"\n")
            self.wfile.flush()


class _SignalHandler(socketserver.StreamRequestHandler):
    def handle(self):
        raw = self.rfile.readline()
        tokens = raw.decode("ascii", "replace").split()
        if len(tokens) != 2 or tokens[0] != "SIG" or _parse_int(tokens[1]) is None:
            self.wfile.write(ERR_SYNTAX.encode("ascii") + b"\n")
            return
        try:
            sub = self.server.endpoint.subscribe_signal(int(tokens[1]))
        except EmulatorError:
            self.wfile.write(ERR_SCOPE.encode("ascii") + b"\n")
            return
        self.wfile.write(b"OK\n")
        self.wfile.flush()
        try:
            while not self.server.closing.is_set():
                for frame in sub.take_frames():
                    self.wfile.write(frame)
                self.wfile.flush()
                self.server.closing.wait(0.005)
        except (BrokenPipeError, ConnectionResetError):
            pass


class QnicServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, endpoint: QnicEndpoint, handler, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), handler)
        self.endpoint = endpoint
        self.closing = threading.Event()
        self._thread: Optional[threading.Thread] = None

    @property
    def port(self) -> int:
        return self.server_address[1]

    def start(self) -> "QnicServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.closing.set()
        self.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=5)
        self.server_close()


def start_serial_server(endpoint: QnicEndpoint, host: str = "127.0.0.1", port: int = 0) -> QnicServer:
    return QnicServer(endpoint, _SerialHandler, host, port).start()


def start_signal_server(endpoint: QnicEndpoint, host: str = "127.0.0.1", port: int = 0) -> QnicServer:
    return QnicServer(endpoint, _SignalHandler, host, port).start()
