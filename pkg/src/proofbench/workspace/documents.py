"""Theory document storage with an append-only version chain.

Canonical content lives in a content-addressed blob area next to a SQLite
index; files for the prover are materialized on demand. Saves are durable
before save_theory returns, and every save appends a version, so nothing a
student wrote is ever overwritten in place.
"""

from __future__ import annotations

import hashlib
import io
import os
import re
import sqlite3
import threading
import time
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from ..isar.lexer import tokenize
from ..isar.structure import theory_header_name
from .users import User

_NAME_RE = re.compile(r"\A[A-Za-z][A-Za-z0-9_']*\Z")

DEFAULT_MAX_DOCS_PER_USER = 500
DEFAULT_MAX_CONTENT_BYTES = 512 * 1024


class NameInvalidError(ValueError):
    pass


class QuotaExceededError(Exception):
    pass


def content_hash(content: str) -> str:
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


@dataclass
class TheoryDocument:
    owner_id: str
    activity_id: str
    name: str
    content: str
    content_hash: str
    created_ms: int
    modified_ms: int
    last_checked_hash: Optional[str] = None

    @property
    def needs_check(self) -> bool:
        return self.content_hash != self.last_checked_hash

    def to_dict(self, with_content: bool = True) -> dict:
        d = {
            "owner_id": self.owner_id,
            "activity_id": self.activity_id,
            "name": self.name,
            "content_hash": self.content_hash,
            "created_ms": self.created_ms,
            "modified_ms": self.modified_ms,
            "last_checked_hash": self.last_checked_hash,
        }
        if with_content:
            d["content"] = self.content
        return d


@dataclass
class CheckPlan:
    to_check: list[TheoryDocument] = field(default_factory=list)
    skipped: list[TheoryDocument] = field(default_factory=list)


def plan_check(requested: list[TheoryDocument]) -> CheckPlan:
    """Incremental split: only documents whose content changed get checked."""
    plan = CheckPlan()
    for doc in requested:
        (plan.to_check if doc.needs_check else plan.skipped).append(doc)
    return plan


_SCHEMA = """
CREATE TABLE IF NOT EXISTS documents (
    owner_id          TEXT NOT NULL,
    activity_id       TEXT NOT NULL,
    name              TEXT NOT NULL,
    content_hash      TEXT NOT NULL,
    created_ms        INTEGER NOT NULL,
    modified_ms       INTEGER NOT NULL,
    last_checked_hash TEXT,
    PRIMARY KEY (owner_id, activity_id, name)
);
CREATE TABLE IF NOT EXISTS versions (
    version_id   INTEGER PRIMARY KEY,
    owner_id     TEXT NOT NULL,
    activity_id  TEXT NOT NULL,
    name         TEXT NOT NULL,
    content_hash TEXT NOT NULL,
    saved_ms     INTEGER NOT NULL
);
"""


class DocumentStore:
    def __init__(
        self,
        data_dir: Union[str, Path],
        max_docs_per_user: int = DEFAULT_MAX_DOCS_PER_USER,
        max_content_bytes: int = DEFAULT_MAX_CONTENT_BYTES,
    ):
        self._dir = Path(data_dir)
        self._blobs = self._dir / "blobs"
        self._blobs.mkdir(parents=True, exist_ok=True)
        self._conn = sqlite3.connect(str(self._dir / "workspace.db"), check_same_thread=False)
        self._conn.executescript(_SCHEMA)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute("PRAGMA synchronous=FULL")
        self._conn.commit()
        self._lock = threading.Lock()
        self.max_docs_per_user = max_docs_per_user
        self.max_content_bytes = max_content_bytes

    def close(self) -> None:
        self._conn.close()

    # -- blobs --------------------------------------------------------------

    def _blob_path(self, digest: str) -> Path:
        return self._blobs / digest[:2] / digest

    def _write_blob(self, content: str) -> str:
        digest = content_hash(content)
        path = self._blob_path(digest)
        if path.exists():
            return digest
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp-%d" % os.getpid())
        data = content.encode("utf-8")
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
        return digest

    def _read_blob(self, digest: str) -> str:
        return self._blob_path(digest).read_text(encoding="utf-8")

    # -- documents ------------------------------------------------------------

    def save_theory(
        self, user: User, activity_id: str, name: str, content: str
    ) -> TheoryDocument:
        if not _NAME_RE.match(name or ""):
            raise NameInvalidError(f"invalid theory name: {name!r}")
        declared = theory_header_name(tokenize(content))
        if declared is not None and declared != name:
            raise NameInvalidError(
                f"theory header declares {declared!r} but the document is named {name!r}"
            )
        if len(content.encode("utf-8")) > self.max_content_bytes:
            raise QuotaExceededError(
                f"theory exceeds the {self.max_content_bytes}-byte limit"
            )
        now = int(time.time() * 1000)
        digest = self._write_blob(content)
        with self._lock:
            count = self._conn.execute(
                "SELECT COUNT(*) FROM documents WHERE owner_id = ?", (user.id,)
            ).fetchone()[0]
            exists = self._conn.execute(
                "SELECT created_ms FROM documents WHERE owner_id=? AND activity_id=? AND name=?",
                (user.id, activity_id, name),
            ).fetchone()
            if exists is None and count >= self.max_docs_per_user:
                raise QuotaExceededError(
                    f"user {user.name!r} reached the {self.max_docs_per_user}-document quota"
                )
            created = exists[0] if exists else now
            self._conn.execute(
                "INSERT INTO documents (owner_id, activity_id, name, content_hash,"
                " created_ms, modified_ms, last_checked_hash) VALUES (?,?,?,?,?,?,NULL)"
                " ON CONFLICT(owner_id, activity_id, name) DO UPDATE SET"
                " content_hash=excluded.content_hash, modified_ms=excluded.modified_ms",
                (user.id, activity_id, name, digest, created, now),
            )
            self._conn.execute(
                "INSERT INTO versions (owner_id, activity_id, name, content_hash, saved_ms)"
                " VALUES (?,?,?,?,?)",
                (user.id, activity_id, name, digest, now),
            )
            self._conn.commit()
        return TheoryDocument(
            owner_id=user.id,
            activity_id=activity_id,
            name=name,
            content=content,
            content_hash=digest,
            created_ms=created,
            modified_ms=now,
            last_checked_hash=self._last_checked(user.id, activity_id, name),
        )

    def _last_checked(self, owner_id: str, activity_id: str, name: str) -> Optional[str]:
        row = self._conn.execute(
            "SELECT last_checked_hash FROM documents"
            " WHERE owner_id=? AND activity_id=? AND name=?",
            (owner_id, activity_id, name),
        ).fetchone()
        return row[0] if row else None

    def load(self, owner_id: str, activity_id: str, name: str) -> Optional[TheoryDocument]:
        row = self._conn.execute(
            "SELECT content_hash, created_ms, modified_ms, last_checked_hash"
            " FROM documents WHERE owner_id=? AND activity_id=? AND name=?",
            (owner_id, activity_id, name),
        ).fetchone()
        if row is None:
            return None
        return TheoryDocument(
            owner_id=owner_id,
            activity_id=activity_id,
            name=name,
            content=self._read_blob(row[0]),
            content_hash=row[0],
            created_ms=row[1],
            modified_ms=row[2],
            last_checked_hash=row[3],
        )

    def list(self, owner_id: str, activity_id: Optional[str] = None) -> list[TheoryDocument]:
        if activity_id is None:
            rows = self._conn.execute(
                "SELECT activity_id, name FROM documents WHERE owner_id=?"
                " ORDER BY activity_id, name",
                (owner_id,),
            ).fetchall()
        else:
            rows = self._conn.execute(
                "SELECT activity_id, name FROM documents WHERE owner_id=? AND activity_id=?"
                " ORDER BY name",
                (owner_id, activity_id),
            ).fetchall()
        docs = []
        for act, name in rows:
            doc = self.load(owner_id, act, name)
            if doc:
                docs.append(doc)
        return docs

    def delete(self, owner_id: str, activity_id: str, name: str) -> bool:
        with self._lock:
            cur = self._conn.execute(
                "DELETE FROM documents WHERE owner_id=? AND activity_id=? AND name=?",
                (owner_id, activity_id, name),
            )
            self._conn.commit()
        return cur.rowcount > 0

    def versions(self, owner_id: str, activity_id: str, name: str) -> list[tuple[int, str]]:
        """(saved_ms, content_hash) pairs, oldest first."""
        return self._conn.execute(
            "SELECT saved_ms, content_hash FROM versions"
            " WHERE owner_id=? AND activity_id=? AND name=? ORDER BY version_id",
            (owner_id, activity_id, name),
        ).fetchall()

    def version_content(self, digest: str) -> str:
        return self._read_blob(digest)

    def mark_checked(self, doc: TheoryDocument) -> None:
        with self._lock:
            self._conn.execute(
                "UPDATE documents SET last_checked_hash=? "
                " WHERE owner_id=? AND activity_id=? AND name=? AND content_hash=?",
                (doc.content_hash, doc.owner_id, doc.activity_id, doc.name, doc.content_hash),
            )
            self._conn.commit()

    # -- prover files -----------------------------------------------------------

    def master_dir(self, owner_id: str) -> Path:
        """Per-user directory in which prover theory files are materialized."""
        path = self._dir / "prover" / owner_id
        path.mkdir(parents=True, exist_ok=True)
        return path

    def materialize(self, doc: TheoryDocument) -> Path:
        path = self.master_dir(doc.owner_id) / f"{doc.name}.thy"
        path.write_text(doc.content, encoding="utf-8")
        return path

    # -- archive export / import -------------------------------------------------

    def export_archive(self, owner_id: str, activity_id: str) -> bytes:
        """Zip of the user's latest theory files for one activity."""
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
            for doc in self.list(owner_id, activity_id):
                zf.writestr(f"{doc.name}.thy", doc.content)
        return buf.getvalue()

    def import_archive(self, user: User, activity_id: str, data: bytes) -> list[str]:
        """Save every .thy member; returns the imported document names."""
        names = []
        with zipfile.ZipFile(io.BytesIO(data)) as zf:
            for info in zf.infolist():
                if info.is_dir() or not info.filename.endswith(".thy"):
                    continue
                name = Path(info.filename).stem
                content = zf.read(info).decode("utf-8")
                self.save_theory(user, activity_id, name, content)
                names.append(name)
        return names
