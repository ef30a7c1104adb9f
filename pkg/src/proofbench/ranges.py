"""Source positions shared by the lexer, linter and prover messages.

Lines are 1-based, columns 0-based; end columns are exclusive.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass


@dataclass(frozen=True)
class SourceRange:
    line: int
    col: int
    end_line: int
    end_col: int

    def to_dict(self) -> dict:
        return {
            "line": self.line,
            "col": self.col,
            "end_line": self.end_line,
            "end_col": self.end_col,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SourceRange":
        return cls(int(d["line"]), int(d["col"]), int(d["end_line"]), int(d["end_col"]))

    def contains(self, other: "SourceRange") -> bool:
        return (self.line, self.col) <= (other.line, other.col) and (
            other.end_line,
            other.end_col,
        ) <= (self.end_line, self.end_col)


class LineIndex:
    """Maps character offsets in a text to (line, col) positions."""

    def __init__(self, text: str):
        self._starts = [0]
        pos = text.find("\n")
        while pos != -1:
            self._starts.append(pos + 1)
            pos = text.find("\n", pos + 1)
        self._length = len(text)

    def position(self, offset: int) -> tuple[int, int]:
        if offset < 0 or offset > self._length:
            raise ValueError(f"offset {offset} out of range 0..{self._length}")
        line = bisect.bisect_right(self._starts, offset)
        return line, offset - self._starts[line - 1]

    def range(self, start: int, end: int) -> SourceRange:
        line, col = self.position(start)
        end_line, end_col = self.position(end)
        return SourceRange(line, col, end_line, end_col)

    def line_span(self, line: int) -> tuple[int, int]:
        """Offsets of one line's content, excluding the newline."""
        if line < 1 or line > len(self._starts):
            raise ValueError(f"line {line} out of range")
        start = self._starts[line - 1]
        end = self._starts[line] - 1 if line < len(self._starts) else self._length
        return start, end

    @property
    def line_count(self) -> int:
        return len(self._starts)
