"""Append-only interaction log backing the didactic analyses.

Every check request snapshots the full theory text with a timestamp;
results, lint displays and structural rejections are recorded as further
events. Records are durable before record_event returns and are never
mutated, so studies can replay a course run exactly.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator, Optional, Union

from .diagnostics import Diagnostic

EXPORT_SCHEMA = {"schema": "proofbench-telemetry", "version": 1}


class EventKind(str, Enum):
    CHECK_SUBMITTED = "check-submitted"
    RESULT_RECEIVED = "result-received"
    LINT_SHOWN = "lint-shown"
    STRUCTURE_REJECTED = "structure-rejected"
    # Defined for completeness; nothing emits these by default.
    KEYSTROKE = "keystroke"


@dataclass
class Durations:
    server_handling: float = 0.0
    prover: float = 0.0

    def to_dict(self) -> dict:
        return {"server_handling": self.server_handling, "prover": self.prover}

    @classmethod
    def from_dict(cls, d: dict) -> "Durations":
        return cls(
            server_handling=float(d.get("server_handling", 0.0)),
            prover=float(d.get("prover", 0.0)),
        )


@dataclass
class CheckEvent:
    user_id: str
    activity_id: str
    kind: EventKind
    timestamp_ms: int
    theory_name: str = ""
    snapshot: str = ""
    diagnostics: list[Diagnostic] = field(default_factory=list)
    durations: Optional[Durations] = None
    event_id: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "user_id": self.user_id,
            "activity_id": self.activity_id,
            "theory_name": self.theory_name,
            "kind": self.kind.value,
            "timestamp_ms": self.timestamp_ms,
            "snapshot": self.snapshot,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "durations": self.durations.to_dict() if self.durations else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckEvent":
        return cls(
            event_id=d.get("event_id"),
            user_id=d["user_id"],
            activity_id=d["activity_id"],
            theory_name=d.get("theory_name", ""),
            kind=EventKind(d["kind"]),
            timestamp_ms=int(d["timestamp_ms"]),
            snapshot=d.get("snapshot", ""),
            diagnostics=[Diagnostic.from_dict(x) for x in d.get("diagnostics", [])],
            durations=Durations.from_dict(d["durations"]) if d.get("durations") else None,
        )


class StorageFullError(OSError):
    pass


@dataclass
class EventFilter:
    user_id: Optional[str] = None
    activity_id: Optional[str] = None
    kind: Optional[EventKind] = None
    since_ms: Optional[int] = None
    until_ms: Optional[int] = None

    def matches(self, event: CheckEvent) -> bool:
        if self.user_id is not None and event.user_id != self.user_id:
            return False
        if self.activity_id is not None and event.activity_id != self.activity_id:
            return False
        if self.kind is not None and event.kind != self.kind:
            return False
        if self.since_ms is not None and event.timestamp_ms < self.since_ms:
            return False
        if self.until_ms is not None and event.timestamp_ms > self.until_ms:
            return False
        return True


_SCHEMA = """
CREATE TABLE IF NOT EXISTS events (
    event_id     INTEGER PRIMARY KEY,
    user_id      TEXT NOT NULL,
    activity_id  TEXT NOT NULL,
    theory_name  TEXT NOT NULL DEFAULT '',
    kind         TEXT NOT NULL,
    timestamp_ms INTEGER NOT NULL,
    snapshot     TEXT NOT NULL DEFAULT '',
    diagnostics  TEXT NOT NULL DEFAULT '[]',
    durations    TEXT
);
CREATE INDEX IF NOT EXISTS idx_events_user_ts ON events (user_id, timestamp_ms);
"""


class EventStore:
    """SQLite-backed append-only event log.

    A single internal writer serializes appends with full fsync durability;
    queries open their own read connections and see a consistent prefix.
    """

    def __init__(self, path: Union[str, Path]):
        self._path = str(path)
        self._write_lock = threading.Lock()
        self._conn = sqlite3.connect(self._path, check_same_thread=False)
        self._conn.executescript(_SCHEMA)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute("PRAGMA synchronous=FULL")
        self._conn.commit()
        row = self._conn.execute(
            "SELECT user_id, MAX(timestamp_ms) FROM events GROUP BY user_id"
        ).fetchall()
        self._last_user_ts: dict[str, int] = {u: ts for u, ts in row}

    def close(self) -> None:
        self._conn.close()

    def record_event(self, event: CheckEvent) -> int:
        """Validate, append durably, return the strictly increasing event id."""
        if event.kind == EventKind.CHECK_SUBMITTED and not event.snapshot:
            raise ValueError("check-submitted events require a non-empty theory snapshot")
        with self._write_lock:
            # Per-user timestamps must be nondecreasing even if the wall
            # clock steps backwards.
            floor = self._last_user_ts.get(event.user_id, 0)
            ts = max(event.timestamp_ms, floor)
            self._last_user_ts[event.user_id] = ts
            event.timestamp_ms = ts
            try:
                cur = self._conn.execute(
                    "INSERT INTO events (event_id, user_id, activity_id, theory_name,"
                    " kind, timestamp_ms, snapshot, diagnostics, durations)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                    (
                        event.event_id,
                        event.user_id,
                        event.activity_id,
                        event.theory_name,
                        event.kind.value,
                        ts,
                        event.snapshot,
                        json.dumps([d.to_dict() for d in event.diagnostics]),
                        json.dumps(event.durations.to_dict()) if event.durations else None,
                    ),
                )
                self._conn.commit()
            except sqlite3.OperationalError as exc:
                if "disk" in str(exc).lower() or "full" in str(exc).lower():
                    raise StorageFullError(str(exc)) from exc
                raise
            event.event_id = cur.lastrowid
            return event.event_id

    def query(self, filter: Optional[EventFilter] = None) -> list[CheckEvent]:
        """Matching events ascending by (timestamp, event_id)."""
        f = filter or EventFilter()
        clauses, params = ["1=1"], []
        if f.user_id is not None:
            clauses.append("user_id = ?")
            params.append(f.user_id)
        if f.activity_id is not None:
            clauses.append("activity_id = ?")
            params.append(f.activity_id)
        if f.kind is not None:
            clauses.append("kind = ?")
            params.append(f.kind.value)
        if f.since_ms is not None:
            clauses.append("timestamp_ms >= ?")
            params.append(f.since_ms)
        if f.until_ms is not None:
            clauses.append("timestamp_ms <= ?")
            params.append(f.until_ms)
        conn = sqlite3.connect(self._path)
        try:
            rows = conn.execute(
                "SELECT event_id, user_id, activity_id, theory_name, kind,"
                f" timestamp_ms, snapshot, diagnostics, durations FROM events"
                f" WHERE {' AND '.join(clauses)} ORDER BY timestamp_ms, event_id",
                params,
            ).fetchall()
        finally:
            conn.close()
        return [self._row_to_event(r) for r in rows]

    @staticmethod
    def _row_to_event(row) -> CheckEvent:
        (event_id, user_id, activity_id, theory_name, kind, ts, snapshot, diags, durs) = row
        return CheckEvent(
            event_id=event_id,
            user_id=user_id,
            activity_id=activity_id,
            theory_name=theory_name,
            kind=EventKind(kind),
            timestamp_ms=ts,
            snapshot=snapshot,
            diagnostics=[Diagnostic.from_dict(d) for d in json.loads(diags)],
            durations=Durations.from_dict(json.loads(durs)) if durs else None,
        )

    # -- export / import -------------------------------------------------

    def export(
        self, filter: Optional[EventFilter] = None, *, role: str = "instructor"
    ) -> Iterator[str]:
        """Line-delimited JSON records, schema header first. Instructors only."""
        if role != "instructor":
            raise PermissionError("telemetry export requires the instructor role")
        yield json.dumps(EXPORT_SCHEMA, separators=(",", ":"))
        for event in self.query(filter):
            yield json.dumps(event.to_dict(), separators=(",", ":"))

    def export_to(self, stream: IO[str], filter: Optional[EventFilter] = None,
                  *, role: str = "instructor") -> int:
        count = -1
        for count, line in enumerate(self.export(filter, role=role)):
            stream.write(line + "\n")
        return count  # number of events (header excluded)

    def import_events(self, lines: Iterable[str]) -> int:
        """Load an export stream, preserving event ids and content exactly."""
        it = iter(lines)
        try:
            header = json.loads(next(it))
        except StopIteration:
            raise ValueError("empty export stream")
        if header.get("schema") != EXPORT_SCHEMA["schema"]:
            raise ValueError(f"unrecognized export schema: {header!r}")
        if header.get("version") != EXPORT_SCHEMA["version"]:
            raise ValueError(f"unsupported export version: {header.get('version')!r}")
        n = 0
        for line in it:
            line = line.strip()
            if not line:
                continue
            self.record_event(CheckEvent.from_dict(json.loads(line)))
            n += 1
        return n


def read_export(lines: Iterable[str]) -> list[CheckEvent]:
    """Parse an export stream into events without a store."""
    it = iter(lines)
    try:
        header = json.loads(next(it))
    except StopIteration:
        raise ValueError("empty export stream")
    if header.get("schema") != EXPORT_SCHEMA["schema"]:
        raise ValueError(f"unrecognized export schema: {header!r}")
    events = []
    for line in it:
        line = line.strip()
        if line:
            events.append(CheckEvent.from_dict(json.loads(line)))
    return events
