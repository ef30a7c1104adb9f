"""Accounts, guest logins and bearer tokens.

Registered users persist in SQLite with salted PBKDF2 password hashes.
Guests are ephemeral: they live in memory only, so their identities and
tokens expire when the server restarts.
"""

from __future__ import annotations

import hashlib
import secrets
import sqlite3
import threading
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Union

_PBKDF2_ITERATIONS = 60_000


class Role(str, Enum):
    STUDENT = "student"
    INSTRUCTOR = "instructor"
    GUEST = "guest"


class BadCredentialsError(Exception):
    pass


@dataclass(frozen=True)
class User:
    id: str
    name: str
    role: Role

    @property
    def is_instructor(self) -> bool:
        return self.role == Role.INSTRUCTOR


def _hash_password(password: str, salt: bytes) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, _PBKDF2_ITERATIONS)


class UserStore:
    def __init__(self, path: Union[str, Path]):
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._lock = threading.Lock()
        self._conn.execute(
            "CREATE TABLE IF NOT EXISTS users ("
            " id TEXT PRIMARY KEY, name TEXT UNIQUE NOT NULL,"
            " role TEXT NOT NULL, pw_hash BLOB NOT NULL, salt BLOB NOT NULL)"
        )
        self._conn.commit()
        self._guests: dict[str, User] = {}
        self._tokens: dict[str, str] = {}  # token -> user id

    def close(self) -> None:
        self._conn.close()

    # -- accounts ---------------------------------------------------------

    def create_user(self, name: str, password: str, role: Role = Role.STUDENT) -> User:
        if not name:
            raise ValueError("user name must be non-empty")
        user_id = "u-" + secrets.token_hex(8)
        salt = secrets.token_bytes(16)
        with self._lock:
            self._conn.execute(
                "INSERT INTO users (id, name, role, pw_hash, salt) VALUES (?, ?, ?, ?, ?)",
                (user_id, name, role.value, _hash_password(password, salt), salt),
            )
            self._conn.commit()
        return User(id=user_id, name=name, role=role)

    def find_by_name(self, name: str) -> Optional[User]:
        row = self._conn.execute(
            "SELECT id, name, role FROM users WHERE name = ?", (name,)
        ).fetchone()
        if row:
            return User(id=row[0], name=row[1], role=Role(row[2]))
        return None

    def get(self, user_id: str) -> Optional[User]:
        guest = self._guests.get(user_id)
        if guest:
            return guest
        row = self._conn.execute(
            "SELECT id, name, role FROM users WHERE id = ?", (user_id,)
        ).fetchone()
        if row:
            return User(id=row[0], name=row[1], role=Role(row[2]))
        return None

    # -- login ------------------------------------------------------------

    def login(self, name: str, password: str) -> tuple[str, User]:
        row = self._conn.execute(
            "SELECT id, name, role, pw_hash, salt FROM users WHERE name = ?", (name,)
        ).fetchone()
        if row is None:
            raise BadCredentialsError("unknown user or wrong password")
        if not secrets.compare_digest(row[3], _hash_password(password, row[4])):
            raise BadCredentialsError("unknown user or wrong password")
        user = User(id=row[0], name=row[1], role=Role(row[2]))
        return self._issue_token(user), user

    def guest_login(self) -> tuple[str, User]:
        with self._lock:
            user = User(
                id="guest-" + secrets.token_hex(6),
                name=f"guest-{len(self._guests) + 1}",
                role=Role.GUEST,
            )
            self._guests[user.id] = user
        return self._issue_token(user), user

    def _issue_token(self, user: User) -> str:
        token = secrets.token_urlsafe(24)
        with self._lock:
            self._tokens[token] = user.id
        return token

    def resolve_token(self, token: str) -> Optional[User]:
        user_id = self._tokens.get(token)
        return self.get(user_id) if user_id else None
