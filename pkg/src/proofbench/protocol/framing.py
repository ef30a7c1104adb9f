"""Message framing for the prover wire protocol.

Commands travel client-to-server as single lines::

    command SP payload-json LF

Replies travel server-to-client either as single lines (``TAG SP payload
LF``) or, for long messages, as byte-count-prefixed blocks: a line holding
the decimal byte count, then exactly that many bytes of ``TAG SP payload``.
A line consisting only of ASCII digits is always a count prefix; command
and tag words must therefore start with a letter.

The decoder is incremental and insensitive to how the byte stream is split
into reads, which is what makes large replies safe to reassemble.
"""

from __future__ import annotations

import json
from typing import Any, BinaryIO, Iterator, Optional

REPLY_TAGS = frozenset({"OK", "ERROR", "NOTE", "FINISHED", "FAILED"})

# Replies longer than this go out as counted blocks.
BLOCK_THRESHOLD = 1024

_MAX_COUNT_DIGITS = 12  # 10^12 bytes is far beyond any legitimate message


class FramingError(Exception):
    """Raised when the byte stream violates the framing rules."""


def _check_head(head: str) -> None:
    if not head or not head[0].isalpha() or any(c.isspace() for c in head):
        raise FramingError(f"invalid message head: {head!r}")


def encode_frame(command: str, payload: Any) -> bytes:
    """Encode a command as one line. Payload must be JSON-serializable."""
    _check_head(command)
    body = json.dumps(payload, separators=(",", ":"))
    return f"{command} {body}\n".encode("utf-8")


def encode_reply(tag: str, payload: Any, block_threshold: int = BLOCK_THRESHOLD) -> bytes:
    """Encode a reply, switching to a counted block when the line gets long."""
    _check_head(tag)
    body = f"{tag} {json.dumps(payload, separators=(',', ':'))}".encode("utf-8")
    if len(body) > block_threshold:
        return str(len(body)).encode("ascii") + b"\n" + body
    return body + b"\n"


def _parse_message(raw: bytes) -> tuple[str, Any]:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FramingError(f"message is not valid UTF-8: {exc}") from exc
    head, sep, body = text.partition(" ")
    _check_head(head)
    if not sep:
        return head, None
    try:
        payload = json.loads(body)
    except json.JSONDecodeError as exc:
        raise FramingError(f"malformed payload after {head!r}: {exc}") from exc
    return head, payload


class FrameDecoder:
    """Incremental decoder; feed() bytes in any split, get complete frames out.

    When allowed_tags is given, a complete frame with a head outside the set
    raises FramingError (the unknown-tag case).
    """

    def __init__(self, allowed_tags: Optional[frozenset[str]] = None):
        self._buf = bytearray()
        self._pos = 0
        self._need: Optional[int] = None
        self._allowed = allowed_tags

    def feed(self, data: bytes) -> list[tuple[str, Any]]:
        self._buf.extend(data)
        frames = []
        while True:
            frame = self._next_frame()
            if frame is None:
                break
            frames.append(frame)
        if self._pos > 65536 and self._pos * 2 > len(self._buf):
            del self._buf[: self._pos]
            self._pos = 0
        return frames

    def _next_frame(self) -> Optional[tuple[str, Any]]:
        if self._need is not None:
            if len(self._buf) - self._pos < self._need:
                return None
            raw = bytes(self._buf[self._pos : self._pos + self._need])
            self._pos += self._need
            self._need = None
            return self._finish_message(raw)

        nl = self._buf.find(b"\n", self._pos)
        if nl == -1:
            return None
        line = bytes(self._buf[self._pos : nl])
        self._pos = nl + 1
        if line.endswith(b"\r"):
            line = line[:-1]
        if line and line.isdigit():
            if len(line) > _MAX_COUNT_DIGITS:
                raise FramingError(f"implausible block count: {line[:32]!r}")
            self._need = int(line)
            return self._next_frame()
        if not line:
            return self._next_frame()  # tolerate blank separator lines
        return self._finish_message(line)

    def _finish_message(self, raw: bytes) -> tuple[str, Any]:
        head, payload = _parse_message(raw)
        if self._allowed is not None and head not in self._allowed:
            raise FramingError(f"unknown tag: {head!r}")
        return head, payload

    @property
    def pending(self) -> bool:
        """True while a partially received frame sits in the buffer."""
        return self._need is not None or len(self._buf) > self._pos

    def finish(self) -> None:
        """Assert end of stream; raises if a frame was left incomplete."""
        if self._need is not None:
            raise FramingError(
                f"stream ended inside a counted block ({self._need} bytes still expected)"
            )
        leftover = bytes(self._buf[self._pos :]).strip()
        if leftover:
            raise FramingError(f"stream ended mid-message: {leftover[:64]!r}")


def read_frames(
    stream: BinaryIO, allowed_tags: Optional[frozenset[str]] = None, chunk_size: int = 65536
) -> Iterator[tuple[str, Any]]:
    """Decode a binary stream to completion, yielding (tag, payload) pairs."""
    decoder = FrameDecoder(allowed_tags)
    while True:
        data = stream.read(chunk_size)
        if not data:
            decoder.finish()
            return
        yield from decoder.feed(data)
