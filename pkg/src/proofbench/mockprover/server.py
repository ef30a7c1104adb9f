"""Socket server emulating a prover, bit-compatible with the client framing.

Verdicts are deterministic, derived from directive comments in the theory
text. Each connection gets its own handler thread; tasks run on worker
threads so a slow check never blocks the command loop. Session state is
shared across connections, like a real prover daemon.
"""

from __future__ import annotations

import socket
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Optional

from ..protocol.framing import FrameDecoder, FramingError, encode_reply
from .directives import evaluate_theory, total_delay

PROTOCOL_INFO = {"server": "mock-prover", "protocol": 1}


@dataclass
class _Session:
    session_id: str
    parent_session: str
    consolidate_delay: float
    theories: set = field(default_factory=set)


@dataclass
class MockStats:
    """Observable counters for tests: what the prover actually saw."""

    connections: int = 0
    auth_failures: int = 0
    sessions: dict = field(default_factory=dict)  # live: session_id -> _Session
    sessions_started: list = field(default_factory=list)  # every id ever issued
    use_theories_calls: list = field(default_factory=list)  # payload dicts
    theories_submitted: list = field(default_factory=list)  # resolved paths
    tasks_finished: list = field(default_factory=list)  # task ids


class _Writer:
    """Serializes frame writes from command and task threads."""

    def __init__(self, send):
        self._send = send
        self._lock = threading.Lock()

    def reply(self, tag: str, payload) -> bool:
        try:
            with self._lock:
                self._send(encode_reply(tag, payload))
            return True
        except OSError:
            return False


class MockProverServer:
    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        password: str = "",
        default_latency: float = 0.0,
    ):
        self.password = password
        self.default_latency = default_latency
        self.stats = MockStats()
        self._lock = threading.Lock()
        self._stopping = threading.Event()
        self._threads: list[threading.Thread] = []
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))  # bind-failure propagates as OSError
        self._sock.listen(32)
        self._accept_thread: Optional[threading.Thread] = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._sock.getsockname()[:2]
        return host, port

    def start(self) -> "MockProverServer":
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        return self

    def stop(self) -> None:
        self._stopping.set()
        try:
            self._sock.close()
        except OSError:
            pass

    def __enter__(self) -> "MockProverServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    # -- connection handling ---------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stopping.is_set():
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return
            thread = threading.Thread(
                target=self._serve_connection, args=(conn,), daemon=True
            )
            thread.start()
            self._threads.append(thread)

    def _serve_connection(self, conn: socket.socket) -> None:
        with self._lock:
            self.stats.connections += 1
        writer = _Writer(conn.sendall)
        try:
            stream = conn.makefile("rb")
            self._handshake_and_serve(stream, writer)
        except OSError:
            pass
        finally:
            try:
                conn.close()
            except OSError:
                pass

    def _handshake_and_serve(self, stream: BinaryIO, writer: _Writer) -> None:
        greeting_line = stream.readline()
        if not greeting_line:
            return
        supplied = greeting_line.rstrip(b"\r\n").decode("utf-8", errors="replace")
        if supplied != self.password:
            with self._lock:
                self.stats.auth_failures += 1
            writer.reply("ERROR", {"message": "authentication failed", "code": "auth-failed"})
            return
        writer.reply("OK", PROTOCOL_INFO)
        self._command_loop(stream, writer)

    def _command_loop(self, stream: BinaryIO, writer: _Writer) -> None:
        decoder = FrameDecoder()
        while not self._stopping.is_set():
            line = stream.readline()
            if not line:
                return
            try:
                frames = decoder.feed(line)
            except FramingError as exc:
                writer.reply("ERROR", {"message": str(exc), "code": "framing-error"})
                return
            for command, payload in frames:
                self._handle_command(command, payload or {}, writer)

    # -- commands ----------------------------------------------------------

    def _handle_command(self, command: str, payload: dict, writer: _Writer) -> None:
        if command == "session_start":
            self._session_start(payload, writer)
        elif command == "use_theories":
            self._use_theories(payload, writer)
        elif command == "purge":
            self._purge(payload, writer)
        elif command == "stop":
            self._stop_session(payload, writer)
        elif command == "echo":
            writer.reply("OK", payload)
        else:
            writer.reply(
                "ERROR", {"message": f"unknown command {command!r}", "code": "unknown-command"}
            )

    def _session_start(self, payload: dict, writer: _Writer) -> None:
        parent = payload.get("parent_session", "HOL")
        delay = float(payload.get("consolidate_delay", 0.5))
        if delay < 0:
            writer.reply(
                "ERROR",
                {"message": "consolidate_delay must be >= 0", "code": "prover-error"},
            )
            return
        session = _Session(
            session_id="S" + uuid.uuid4().hex[:12],
            parent_session=parent,
            consolidate_delay=delay,
        )
        with self._lock:
            self.stats.sessions[session.session_id] = session
            self.stats.sessions_started.append(session.session_id)
        writer.reply("OK", {"session_id": session.session_id})

    def _purge(self, payload: dict, writer: _Writer) -> None:
        session = self._require_session(payload, writer)
        if session is None:
            return
        requested = payload.get("theories")
        with self._lock:
            if requested is None:
                purged = len(session.theories)
                session.theories.clear()
            else:
                victims = set(map(str, requested)) & session.theories
                purged = len(victims)
                session.theories -= victims
        writer.reply("OK", {"purged": purged})

    def _stop_session(self, payload: dict, writer: _Writer) -> None:
        session_id = payload.get("session_id", "")
        with self._lock:
            known = self.stats.sessions.pop(session_id, None)
        if known is None:
            writer.reply(
                "ERROR",
                {"message": f"unknown session {session_id!r}", "code": "unknown-session"},
            )
            return
        writer.reply("OK", {"stopped": session_id})

    def _require_session(self, payload: dict, writer: _Writer) -> Optional[_Session]:
        session_id = payload.get("session_id", "")
        with self._lock:
            session = self.stats.sessions.get(session_id)
        if session is None:
            writer.reply(
                "ERROR",
                {"message": f"unknown session {session_id!r}", "code": "unknown-session"},
            )
        return session

    def _use_theories(self, payload: dict, writer: _Writer) -> None:
        session = self._require_session(payload, writer)
        if session is None:
            return
        theories = [str(t) for t in payload.get("theories", [])]
        master_dir = Path(payload.get("master_dir", "."))
        task_id = "T" + uuid.uuid4().hex[:12]
        with self._lock:
            self.stats.use_theories_calls.append(dict(payload))
            for name in theories:
                self.stats.theories_submitted.append(str(self._resolve(master_dir, name)))
            session.theories.update(theories)
        writer.reply("OK", {"task_id": task_id})
        worker = threading.Thread(
            target=self._run_task,
            args=(task_id, theories, master_dir, writer),
            daemon=True,
        )
        worker.start()

    @staticmethod
    def _resolve(master_dir: Path, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() else master_dir / name

    def _run_task(
        self, task_id: str, theories: list[str], master_dir: Path, writer: _Writer
    ) -> None:
        messages = []
        delay = self.default_latency
        for name in theories:
            path = self._resolve(master_dir, name)
            theory_name = path.stem
            writer.reply(
                "NOTE",
                {
                    "task_id": task_id,
                    "theory_name": theory_name,
                    "message": f"checking {theory_name}",
                },
            )
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                writer.reply(
                    "FAILED", {"task_id": task_id, "message": f"cannot read {path}: {exc}"}
                )
                return
            delay += total_delay(text)
            messages.extend(m.to_dict() for m in evaluate_theory(text, theory_name))
        if delay > 0:
            time.sleep(delay)
        ok = not any(m["kind"] == "error" for m in messages)
        writer.reply("FINISHED", {"task_id": task_id, "ok": ok, "messages": messages})
        with self._lock:
            self.stats.tasks_finished.append(task_id)


def serve_stdio(
    stdin: BinaryIO, stdout: BinaryIO, password: str = "", default_latency: float = 0.0
) -> None:
    """Serve exactly one client over a stdio pipe (same framing as TCP)."""
    server = MockProverServer(password=password, default_latency=default_latency)
    try:
        def send(data: bytes) -> None:
            stdout.write(data)
            stdout.flush()

        writer = _Writer(send)
        server._handshake_and_serve(stdin, writer)
    finally:
        server.stop()
