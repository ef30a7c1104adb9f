"""Prover wire protocol: framing plus the TCP/pipe client."""

from .framing import (
    FramingError,
    FrameDecoder,
    REPLY_TAGS,
    encode_frame,
    encode_reply,
    read_frames,
)
from .client import (
    AuthFailedError,
    ConnectionLostError,
    PipeAddress,
    ProgressNote,
    ProtocolViolationError,
    ProverConnectError,
    ProverClient,
    ProverError,
    ProverMessage,
    SessionOptions,
    TaskOutcome,
    TaskTimeoutError,
    TcpAddress,
    TheoryFileError,
)

__all__ = [
    "FramingError",
    "FrameDecoder",
    "REPLY_TAGS",
    "encode_frame",
    "encode_reply",
    "read_frames",
    "AuthFailedError",
    "ConnectionLostError",
    "PipeAddress",
    "ProgressNote",
    "ProtocolViolationError",
    "ProverConnectError",
    "ProverClient",
    "ProverError",
    "ProverMessage",
    "SessionOptions",
    "TaskOutcome",
    "TaskTimeoutError",
    "TcpAddress",
    "TheoryFileError",
]
