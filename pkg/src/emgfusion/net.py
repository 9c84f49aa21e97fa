"""Line-based control protocol between modality clients and the arm server.

Requests (one per line, UTF-8, LF-terminated)::

    EVT GESTURE <ts_ms> <label> <confidence>
    EVT SPEECH <ts_ms> <free text to end of line>
    STATE
    QUIT

Every request gets exactly one reply line::

    DEC <ts_ms> PIN<n>|NONE GESTURE|SPEECH|NONE
    STATE <a0> <a1> <a2> <a3> <a4>
    ERR <code> <detail>

Arm state is shared by all connections of one server; the gesture/speech
timeline is per connection.
"""
from __future__ import annotations

import logging
import re
import socket
import socketserver
import threading
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .arm import ArmState
from .errors import ProtocolError, UnknownLabel
from .fusion import FusionEngine, ModalityEvent, Provenance
from .labels import GestureLabel, SpeechCommand
from .speech import AliasTable, default_alias_table

log = logging.getLogger(__name__)

DEFAULT_PORT = 5757
DEFAULT_WINDOW_MS = 500
QUIT_ACK = "DEC 0 NONE NONE"

REPLY_RE = re.compile(
    r"DEC \d+ (?:PIN\d+|NONE) (?:GESTURE|SPEECH|NONE)"
    r"|STATE(?: \d+\.\d){5}"
    r"|ERR \d{3} \S.*"
)
_TS_RE = re.compile(r"\d{1,18}")


class RequestError(Exception):
    def __init__(self, code: int, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail

    @property
    def reply(self) -> str:
        return f"ERR {self.code} {self.detail}"


@dataclass(frozen=True)
class ServerConfig:
    engine: FusionEngine = field(default_factory=FusionEngine)
    aliases: AliasTable = field(default_factory=default_alias_table)
    window_ms: int = DEFAULT_WINDOW_MS


class ArmServerState:
    """State shared by every session of one server; all writes hold ``lock``."""

    def __init__(self, config: ServerConfig | None = None):
        self.config = config or ServerConfig()
        self.arm = ArmState()
        self.lock = threading.Lock()


def _parse_ts(tok: str) -> int:
    if not _TS_RE.fullmatch(tok):
        raise RequestError(400, "bad-timestamp")
    return int(tok)


def _parse_confidence(tok: str) -> float:
    try:
        conf = float(tok)
    except ValueError:
        raise RequestError(400, "bad-confidence") from None
    if not 0.0 <= conf <= 1.0:  # also rejects nan
        raise RequestError(400, "confidence-out-of-range")
    return conf


def format_decision(ts: int, pin: Optional[int], provenance: Provenance) -> str:
    target = f"PIN{pin}" if pin is not None else "NONE"
    return f"DEC {ts} {target} {provenance.value}"


class Session:
    """One client's view: parses request lines and keeps the fusion timeline.

    A gesture at or above threshold decides at once. A speech event decides
    only when no accepted gesture happened in the preceding ``window_ms``
    (``0 <= t_speech - t_gesture <= window_ms`` suppresses it).
    """

    def __init__(self, shared: ArmServerState):
        self.shared = shared
        self.last_gesture_ms: Optional[int] = None
        self.gesture_failures: list[int] = []
        self.closed = False

    @property
    def engine(self) -> FusionEngine:
        return self.shared.config.engine

    def handle(self, line: str) -> str:
        try:
            return self._dispatch(line.rstrip("\r\n"))
        except RequestError as exc:
            return exc.reply

    def _dispatch(self, line: str) -> str:
        if line == "STATE":
            with self.shared.lock:
                return self.shared.arm.dump()
        if line == "QUIT":
            self.closed = True
            return QUIT_ACK
        if line.startswith("EVT GESTURE "):
            parts = line.split(" ")
            if len(parts) != 5:
                raise RequestError(400, "gesture-arity")
            ts = _parse_ts(parts[2])
            try:
                label = GestureLabel.parse(parts[3])
            except UnknownLabel:
                raise RequestError(404, "unknown-label") from None
            return self.on_gesture(ModalityEvent.gesture(ts, label, _parse_confidence(parts[4])))
        if line.startswith("EVT SPEECH "):
            parts = line.split(" ", 3)
            if len(parts) != 4 or not parts[3].strip():
                raise RequestError(400, "speech-arity")
            return self.on_speech(_parse_ts(parts[2]), parts[3])
        if not line:
            raise RequestError(400, "empty-request")
        raise RequestError(400, "unknown-request")

    def on_gesture(self, event: ModalityEvent) -> str:
        decision = self.engine.fuse(event, None)
        if decision.provenance is not Provenance.GESTURE_PRIMARY:
            self.gesture_failures.append(event.timestamp_ms)
            return format_decision(event.timestamp_ms, None, Provenance.NO_COMMAND)
        self.last_gesture_ms = event.timestamp_ms
        with self.shared.lock:
            self.shared.arm.apply(decision.action, event.timestamp_ms)
        return format_decision(event.timestamp_ms, decision.action.pin, decision.provenance)

    def on_speech(self, ts: int, text: str) -> str:
        resolved = self.shared.config.aliases.resolve(text)
        suppressed = (self.last_gesture_ms is not None
                      and 0 <= ts - self.last_gesture_ms <= self.shared.config.window_ms)
        if not isinstance(resolved, SpeechCommand) or suppressed:
            return format_decision(ts, None, Provenance.NO_COMMAND)
        decision = self.engine.fuse(None, ModalityEvent.speech(ts, resolved))
        with self.shared.lock:
            self.shared.arm.apply(decision.action, ts)
        return format_decision(ts, decision.action.pin, decision.provenance)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        session = Session(self.server.shared)
        peer = self.client_address
        log.info("session open %s", peer)
        for raw in self.rfile:
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError:
                reply = "ERR 400 bad-encoding"
            else:
                reply = session.handle(line)
            self.wfile.write((reply + "\n").encode("utf-8"))
            self.wfile.flush()
            if session.closed:
                break
        log.info("session closed %s", peer)
        self.server.on_session_end()


class ControlServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, config: ServerConfig | None = None, once: bool = False):
        super().__init__(address, _Handler)
        self.shared = ArmServerState(config)
        self.once = once

    def on_session_end(self):
        if self.once:
            threading.Thread(target=self.shutdown, daemon=True).start()

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve(bind_address=("127.0.0.1", DEFAULT_PORT), config: ServerConfig | None = None,
          once: bool = False) -> None:
    """Run the arm server until interrupted (or after one session with ``once``)."""
    with ControlServer(bind_address, config, once) as srv:
        log.info("listening on %s:%d", srv.server_address[0], srv.port)
        try:
            srv.serve_forever()
        except KeyboardInterrupt:
            pass


def start_background(bind_address=("127.0.0.1", 0), config: ServerConfig | None = None) -> ControlServer:
    """Start a server on a daemon thread; call ``shutdown()`` and ``server_close()`` when done."""
    srv = ControlServer(bind_address, config)
    threading.Thread(target=srv.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True).start()
    return srv


def client_send(address, messages: Iterable[str], timeout: float = 5.0) -> list[str]:
    """Send request lines in order and return one validated reply per request."""
    replies = []
    try:
        with socket.create_connection(address, timeout=timeout) as sock, \
                sock.makefile("rwb") as stream:
            for msg in messages:
                stream.write(msg.rstrip("\n").encode("utf-8") + b"\n")
                stream.flush()
                raw = stream.readline()
                if not raw:
                    raise ProtocolError(f"connection closed before reply to {msg!r}")
                reply = raw.decode("utf-8").rstrip("\n")
                if not REPLY_RE.fullmatch(reply):
                    raise ProtocolError(f"malformed reply {reply!r}")
                replies.append(reply)
    except ProtocolError:
        raise
    except OSError as exc:
        raise ConnectionError(f"cannot talk to {address}: {exc}") from exc
    return replies
