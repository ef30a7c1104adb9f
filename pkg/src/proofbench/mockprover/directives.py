"""Directive comments that make mock verdicts deterministic.

A fixture theory states its own expected messages inline::

    (*MOCK:error 3 "Type unification failed"*)
    (*MOCK:warning 5 "Introduced fixed type variable"*)
    (*MOCK:delay 0.25 "thinking"*)

Directives live in ordinary comments, so real provers ignore them. On top
of directives, any ``sorry`` token outside comments or quotations yields an
"unfinished proof" error, which keeps untagged fixtures minimally realistic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..protocol.client import ProverMessage
from ..isar.lexer import TokenClass, tokenize
from ..ranges import LineIndex, SourceRange

_DIRECTIVE = re.compile(
    r"\(\*MOCK:(?P<kind>error|warning|delay)\s+(?P<arg>\S+)\s+\"(?P<text>[^\"]*)\"\*\)"
)
_MARKER = "(*MOCK:"

_WORD_KINDS = (TokenClass.COMMAND_KEYWORD, TokenClass.INNER_KEYWORD, TokenClass.IDENTIFIER)


@dataclass(frozen=True)
class MockDirective:
    kind: str  # error | warning | delay
    arg: str
    text: str
    offset: int


def _scan(text: str) -> tuple[list[MockDirective], list[int]]:
    """Well-formed directives plus offsets of malformed MOCK markers."""
    directives = []
    malformed = []
    pos = text.find(_MARKER)
    while pos != -1:
        m = _DIRECTIVE.match(text, pos)
        if m:
            directives.append(
                MockDirective(m.group("kind"), m.group("arg"), m.group("text"), pos)
            )
            pos = text.find(_MARKER, m.end())
        else:
            malformed.append(pos)
            pos = text.find(_MARKER, pos + len(_MARKER))
    return directives, malformed


def _line_range(index: LineIndex, line: int) -> SourceRange:
    start, end = index.line_span(line)
    _, start_col = index.position(start)
    _, end_col = index.position(end)
    return SourceRange(line, start_col, line, end_col)


def evaluate_theory(text: str, theory_name: str = "") -> list[ProverMessage]:
    """Deterministic messages for one theory text.

    One message per well-formed error/warning directive at its stated line,
    an info note per malformed directive, and an error per ``sorry`` token.
    """
    index = LineIndex(text)
    messages: list[ProverMessage] = []

    directives, malformed = _scan(text)
    for d in directives:
        if d.kind == "delay":
            continue
        try:
            line = int(d.arg)
        except ValueError:
            line = -1
        if line < 1 or line > index.line_count:
            messages.append(
                ProverMessage(
                    kind="info",
                    text=f"ignored mock directive with out-of-range line {d.arg!r}",
                    theory_name=theory_name,
                    position=None,
                )
            )
            continue
        messages.append(
            ProverMessage(
                kind=d.kind,
                text=d.text,
                theory_name=theory_name,
                position=_line_range(index, line),
            )
        )
    for off in malformed:
        line, _ = index.position(off)
        messages.append(
            ProverMessage(
                kind="info",
                text="ignored malformed mock directive",
                theory_name=theory_name,
                position=_line_range(index, line),
            )
        )

    for token in tokenize(text):
        if token.kind in _WORD_KINDS and token.text == "sorry":
            messages.append(
                ProverMessage(
                    kind="error",
                    text="unfinished proof",
                    theory_name=theory_name,
                    position=token.range,
                )
            )

    messages.sort(key=lambda m: (m.position.line, m.position.col) if m.position else (0, 0))
    return messages


def total_delay(text: str) -> float:
    """Sum of delay-directive seconds in one theory text."""
    directives, _ = _scan(text)
    delay = 0.0
    for d in directives:
        if d.kind != "delay":
            continue
        try:
            delay += max(0.0, float(d.arg))
        except ValueError:
            pass
    return delay
