"""Client for an Isabelle-server-style prover over TCP or a child-process pipe.

One connection carries many in-flight tasks. Command submission is
serialized; asynchronous NOTE/FINISHED/FAILED replies are dispatched by
task id from a reader thread, so different callers can await different
tasks concurrently on a shared handle.
"""

from __future__ import annotations

import shlex
import socket
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from queue import Empty, Queue
from typing import Any, Callable, Optional, Sequence, Union

from ..ranges import SourceRange
from .framing import REPLY_TAGS, FrameDecoder, FramingError, encode_frame

DEFAULT_TASK_TIMEOUT = 60.0


class ProverConnectError(ConnectionError):
    """Prover not reachable at the given address."""


class AuthFailedError(Exception):
    """The greeting rejected our password."""


class ProtocolViolationError(Exception):
    """The peer broke the framing or handshake rules."""


class ConnectionLostError(Exception):
    """The connection dropped while replies were still expected."""


class TaskTimeoutError(TimeoutError):
    """await_task timed out; the task keeps running and can be awaited again."""


class TheoryFileError(OSError):
    """A theory path does not exist or cannot be read."""


class ProverError(Exception):
    """An ERROR reply from the prover, e.g. unknown session or build failure."""

    def __init__(self, message: str, code: str = ""):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class TcpAddress:
    host: str
    port: int

    def __post_init__(self):
        if not self.host:
            raise ValueError("tcp address requires a non-empty host")


@dataclass(frozen=True)
class PipeAddress:
    command: str

    def __post_init__(self):
        if not self.command.strip():
            raise ValueError("pipe address requires a non-empty command line")


ProverAddress = Union[TcpAddress, PipeAddress]


@dataclass
class SessionOptions:
    consolidate_delay: float = 0.5
    parent_session: str = "HOL"

    def __post_init__(self):
        if self.consolidate_delay < 0:
            raise ValueError("consolidate_delay must be >= 0")


@dataclass(frozen=True)
class ProverSessionId:
    id: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("session id must be non-empty")


@dataclass
class ProgressNote:
    text: str
    theory_name: str = ""
    received_at: float = 0.0


@dataclass
class ProverMessage:
    kind: str  # error | warning | info
    text: str
    theory_name: str = ""
    position: Optional[SourceRange] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "text": self.text,
            "theory_name": self.theory_name,
            "position": self.position.to_dict() if self.position else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProverMessage":
        return cls(
            kind=d["kind"],
            text=d["text"],
            theory_name=d.get("theory_name", ""),
            position=SourceRange.from_dict(d["position"]) if d.get("position") else None,
        )


@dataclass
class TaskOutcome:
    task_id: str
    verdict: str  # finished | failed
    progress: list[ProgressNote] = field(default_factory=list)
    messages: list[ProverMessage] = field(default_factory=list)

    @property
    def errors(self) -> list[ProverMessage]:
        return [m for m in self.messages if m.kind == "error"]


class _Task:
    __slots__ = ("progress", "outcome", "done", "error", "on_progress")

    def __init__(self, on_progress: Optional[Callable[[ProgressNote], None]] = None):
        self.progress: list[ProgressNote] = []
        self.outcome: Optional[TaskOutcome] = None
        self.error: Optional[Exception] = None
        self.done = threading.Event()
        self.on_progress = on_progress


class _TcpTransport:
    def __init__(self, host: str, port: int, timeout: float):
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise ProverConnectError(f"cannot connect to {host}:{port}: {exc}") from exc
        self._sock.settimeout(None)

    def send(self, data: bytes) -> None:
        self._sock.sendall(data)

    def recv(self) -> bytes:
        return self._sock.recv(65536)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class _PipeTransport:
    def __init__(self, command: str):
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        except OSError as exc:
            raise ProverConnectError(f"cannot start prover process: {exc}") from exc

    def send(self, data: bytes) -> None:
        assert self._proc.stdin is not None
        self._proc.stdin.write(data)
        self._proc.stdin.flush()

    def recv(self) -> bytes:
        assert self._proc.stdout is not None
        return self._proc.stdout.read1(65536)

    def close(self) -> None:
        try:
            if self._proc.stdin:
                self._proc.stdin.close()
        except OSError:
            pass
        try:
            self._proc.terminate()
            self._proc.wait(timeout=5)
        except Exception:
            self._proc.kill()


class ProverClient:
    """A live, shareable connection to a prover."""

    def __init__(self, transport, default_timeout: float = DEFAULT_TASK_TIMEOUT):
        self._transport = transport
        self.default_timeout = default_timeout
        self._cmd_lock = threading.Lock()
        self._reply_q: Queue = Queue()
        self._tasks: dict[str, _Task] = {}
        self._orphans: dict[str, list[tuple[str, Any]]] = {}
        # Reentrant: frame delivery happens both from the reader thread and,
        # for frames that raced ahead of task registration, from use_theories.
        self._state_lock = threading.RLock()
        self._closed = False
        self.unexpected_frames: list[tuple[str, Any]] = []
        self._reader = threading.Thread(target=self._read_loop, daemon=True)

    # -- connection -----------------------------------------------------

    @classmethod
    def connect(
        cls,
        addr: ProverAddress,
        password: str = "",
        timeout: float = 10.0,
        default_timeout: float = DEFAULT_TASK_TIMEOUT,
    ) -> "ProverClient":
        """Handshake: send the password line, require an OK greeting."""
        if isinstance(addr, TcpAddress):
            transport = _TcpTransport(addr.host, addr.port, timeout)
        elif isinstance(addr, PipeAddress):
            transport = _PipeTransport(addr.command)
        else:
            raise TypeError(f"unsupported address: {addr!r}")

        transport.send(password.encode("utf-8") + b"\n")
        decoder = FrameDecoder(REPLY_TAGS)
        deadline = time.monotonic() + timeout
        frames: list[tuple[str, Any]] = []
        try:
            while not frames:
                if time.monotonic() > deadline:
                    raise ProtocolViolationError("no greeting before timeout")
                data = transport.recv()
                if not data:
                    raise AuthFailedError("connection closed during handshake")
                frames = decoder.feed(data)
        except FramingError as exc:
            transport.close()
            raise ProtocolViolationError(f"malformed greeting: {exc}") from exc
        except Exception:
            transport.close()
            raise

        tag, payload = frames[0]
        if tag == "ERROR":
            transport.close()
            raise AuthFailedError((payload or {}).get("message", "authentication rejected"))
        if tag != "OK":
            transport.close()
            raise ProtocolViolationError(f"unexpected greeting tag {tag!r}")

        client = cls(transport, default_timeout=default_timeout)
        for frame in frames[1:]:
            client._dispatch(frame)
        client._reader.start()
        return client

    def close(self) -> None:
        with self._state_lock:
            if self._closed:
                return
            self._closed = True
        self._transport.close()

    # -- commands -------------------------------------------------------

    def _command(self, command: str, payload: Any, timeout: float = 30.0) -> Any:
        with self._cmd_lock:
            with self._state_lock:
                if self._closed:
                    raise ConnectionLostError("connection is closed")
            try:
                self._transport.send(encode_frame(command, payload))
            except OSError as exc:
                raise ConnectionLostError(str(exc)) from exc
            try:
                tag, reply = self._reply_q.get(timeout=timeout)
            except Empty:
                raise ConnectionLostError(f"no reply to {command!r} within {timeout}s")
        if tag == "ERROR":
            info = reply or {}
            if info.get("code") == "connection-lost":
                raise ConnectionLostError(info.get("message", "connection lost"))
            raise ProverError(info.get("message", "prover error"), info.get("code", ""))
        if tag != "OK":
            raise ProtocolViolationError(f"unexpected reply tag {tag!r} to {command!r}")
        return reply

    def session_start(self, opts: SessionOptions) -> ProverSessionId:
        reply = self._command(
            "session_start",
            {
                "parent_session": opts.parent_session,
                "consolidate_delay": opts.consolidate_delay,
            },
        )
        return ProverSessionId(reply["session_id"])

    def session_stop(self, session: ProverSessionId) -> None:
        self._command("stop", {"session_id": session.id})

    def purge_theories(self, session: ProverSessionId, theories: Sequence[str]) -> int:
        reply = self._command(
            "purge", {"session_id": session.id, "theories": list(theories)}
        )
        return int(reply.get("purged", 0))

    def use_theories(
        self,
        session: ProverSessionId,
        theories: Sequence[Union[str, Path]],
        master_dir: Union[str, Path],
        on_progress: Optional[Callable[[ProgressNote], None]] = None,
    ) -> str:
        """Submit theories for checking; returns the task id immediately."""
        master = Path(master_dir)
        names = [str(t) for t in theories]
        for name in names:
            path = Path(name)
            if not path.is_absolute():
                path = master / name
            if not path.is_file():
                raise TheoryFileError(f"theory file not readable: {path}")
        reply = self._command(
            "use_theories",
            {"session_id": session.id, "theories": names, "master_dir": str(master)},
        )
        task_id = reply["task_id"]
        with self._state_lock:
            self._tasks[task_id] = _Task(on_progress)
            # Replay frames that arrived before the task id was known; holding
            # the lock keeps them ordered before anything the reader adds next.
            for frame in self._orphans.pop(task_id, []):
                self._deliver(task_id, frame)
        return task_id

    def await_task(self, task_id: str, timeout: Optional[float] = None) -> TaskOutcome:
        """Block until the task's terminal verdict arrives."""
        with self._state_lock:
            task = self._tasks.get(task_id)
        if task is None:
            raise ValueError(f"task {task_id!r} was not issued on this connection")
        if not task.done.wait(self.default_timeout if timeout is None else timeout):
            raise TaskTimeoutError(f"task {task_id} still running")
        if task.error is not None:
            raise task.error
        assert task.outcome is not None
        return task.outcome

    # -- reply dispatch ---------------------------------------------------

    def _read_loop(self) -> None:
        decoder = FrameDecoder(REPLY_TAGS)
        try:
            while True:
                data = self._transport.recv()
                if not data:
                    decoder.finish()
                    break
                for frame in decoder.feed(data):
                    self._dispatch(frame)
        except (FramingError, OSError, ValueError) as exc:
            self._fail_pending(ConnectionLostError(str(exc)))
            return
        self._fail_pending(ConnectionLostError("connection closed by prover"))

    def _dispatch(self, frame: tuple[str, Any]) -> None:
        tag, payload = frame
        if tag in ("OK", "ERROR"):
            self._reply_q.put(frame)
            return
        task_id = (payload or {}).get("task_id", "")
        if not task_id:
            self.unexpected_frames.append(frame)
            return
        with self._state_lock:
            if task_id not in self._tasks:
                self._orphans.setdefault(task_id, []).append(frame)
                return
            self._deliver(task_id, frame)

    def _deliver(self, task_id: str, frame: tuple[str, Any]) -> None:
        tag, payload = frame
        task = self._tasks.get(task_id)
        if task is None or task.done.is_set():
            self.unexpected_frames.append(frame)
            return
        if tag == "NOTE":
            note = ProgressNote(
                text=payload.get("message", ""),
                theory_name=payload.get("theory_name", ""),
                received_at=time.time(),
            )
            task.progress.append(note)
            if task.on_progress is not None:
                try:
                    task.on_progress(note)
                except Exception:
                    pass  # observer errors must not break dispatch
        elif tag == "FINISHED":
            task.outcome = TaskOutcome(
                task_id=task_id,
                verdict="finished",
                progress=list(task.progress),
                messages=[ProverMessage.from_dict(m) for m in payload.get("messages", [])],
            )
            task.done.set()
        elif tag == "FAILED":
            task.outcome = TaskOutcome(
                task_id=task_id,
                verdict="failed",
                progress=list(task.progress),
                messages=[
                    ProverMessage(kind="error", text=payload.get("message", "task failed"))
                ],
            )
            task.done.set()

    def _fail_pending(self, error: ConnectionLostError) -> None:
        with self._state_lock:
            tasks = list(self._tasks.values())
            self._closed = True
        for task in tasks:
            if not task.done.is_set():
                task.error = error
                task.done.set()
        self._reply_q.put(("ERROR", {"message": str(error), "code": "connection-lost"}))


def connect(
    addr: ProverAddress, password: str = "", timeout: float = 10.0
) -> ProverClient:
    """Module-level convenience mirroring ProverClient.connect."""
    return ProverClient.connect(addr, password=password, timeout=timeout)
