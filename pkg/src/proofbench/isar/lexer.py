"""Lossless tokenizer for the structural subset of Isar.

Only enough of the language is recognized to drive syntax highlighting,
bracket/block checking and token-wise linting: keywords, identifiers,
strings, nesting comments and cartouches, symbol escapes. Everything the
scanner cannot place becomes an ``unknown`` token, so the concatenation of
token texts always reproduces the input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from ..ranges import LineIndex, SourceRange

COMMENT_OPEN = "(*"
COMMENT_CLOSE = "*)"
CARTOUCHE_OPEN = "‹"  # ‹
CARTOUCHE_CLOSE = "›"  # ›

# Outer-syntax commands this platform's structure checks care about. Kept
# deliberately small; pass custom sets to tokenize() to extend.
DEFAULT_COMMAND_KEYWORDS = frozenset(
    {
        "theory",
        "imports",
        "begin",
        "end",
        "section",
        "subsection",
        "text",
        "lemma",
        "theorem",
        "corollary",
        "proposition",
        "schematic_goal",
        "definition",
        "abbreviation",
        "fun",
        "function",
        "primrec",
        "datatype",
        "type_synonym",
        "record",
        "inductive",
        "proof",
        "qed",
        "by",
        "apply",
        "done",
        "oops",
        "sorry",
        "term",
        "value",
        "thm",
        "declare",
    }
)

DEFAULT_INNER_KEYWORDS = frozenset(
    {
        "and",
        "assume",
        "assumes",
        "case",
        "fix",
        "fixes",
        "for",
        "from",
        "have",
        "hence",
        "if",
        "in",
        "is",
        "let",
        "moreover",
        "next",
        "note",
        "obtain",
        "shows",
        "show",
        "then",
        "this",
        "thus",
        "ultimately",
        "unfolding",
        "using",
        "when",
        "where",
        "with",
        "also",
        "finally",
    }
)


class TokenClass(str, Enum):
    COMMAND_KEYWORD = "command-keyword"
    INNER_KEYWORD = "inner-keyword"
    IDENTIFIER = "identifier"
    SYMBOL = "symbol"
    STRING_LITERAL = "string-literal"
    CARTOUCHE = "cartouche"
    COMMENT = "comment"
    WHITESPACE = "whitespace"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Token:
    kind: TokenClass
    text: str
    range: SourceRange


def _is_word_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_" or ch.isdigit()


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_'"


def _scan_comment(text: str, start: int) -> int:
    """Return the end offset of a nesting (* ... *) comment opened at start."""
    depth = 1
    i = start + 2
    n = len(text)
    while depth > 0 and i < n:
        nxt_open = text.find(COMMENT_OPEN, i)
        nxt_close = text.find(COMMENT_CLOSE, i)
        if nxt_close == -1:
            return n  # runs to end of input, unterminated
        if nxt_open != -1 and nxt_open < nxt_close:
            depth += 1
            i = nxt_open + 2
        else:
            depth -= 1
            i = nxt_close + 2
    return i


def _scan_cartouche(text: str, start: int) -> int:
    depth = 1
    i = start + 1
    n = len(text)
    while depth > 0 and i < n:
        ch = text[i]
        if ch == CARTOUCHE_OPEN:
            depth += 1
        elif ch == CARTOUCHE_CLOSE:
            depth -= 1
        i += 1
    return i


def _scan_string(text: str, start: int) -> int:
    i = start + 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\" and i + 1 < n:
            i += 2
            continue
        if ch == '"':
            return i + 1
        i += 1
    return n  # unterminated


def _scan_symbol_escape(text: str, start: int) -> int:
    """Length of an Isabelle symbol escape like \\<and> starting at start, or 0."""
    if not text.startswith("\\<", start):
        return 0
    i = start + 2
    n = len(text)
    while i < n and (text[i].isalnum() or text[i] in "_^"):
        i += 1
    if i < n and text[i] == ">":
        return i + 1 - start
    return 0


def tokenize(
    text: str,
    command_keywords: Iterable[str] = DEFAULT_COMMAND_KEYWORDS,
    inner_keywords: Iterable[str] = DEFAULT_INNER_KEYWORDS,
) -> list[Token]:
    """Split text into a lossless, contiguous token stream."""
    commands = frozenset(command_keywords)
    inner = frozenset(inner_keywords)
    spans: list[tuple[int, int, TokenClass]] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            spans.append((i, j, TokenClass.WHITESPACE))
        elif text.startswith(COMMENT_OPEN, i):
            j = _scan_comment(text, i)
            spans.append((i, j, TokenClass.COMMENT))
        elif ch == '"':
            j = _scan_string(text, i)
            spans.append((i, j, TokenClass.STRING_LITERAL))
        elif ch == CARTOUCHE_OPEN:
            j = _scan_cartouche(text, i)
            spans.append((i, j, TokenClass.CARTOUCHE))
        elif _is_word_start(ch):
            j = i + 1
            while j < n and _is_word_char(text[j]):
                j += 1
            word = text[i:j]
            if word in commands:
                kind = TokenClass.COMMAND_KEYWORD
            elif word in inner:
                kind = TokenClass.INNER_KEYWORD
            else:
                kind = TokenClass.IDENTIFIER
            spans.append((i, j, kind))
        elif ch == "\\":
            esc = _scan_symbol_escape(text, i)
            if esc:
                spans.append((i, i + esc, TokenClass.SYMBOL))
            else:
                spans.append((i, i + 1, TokenClass.UNKNOWN))
        elif ch.isprintable():
            spans.append((i, i + 1, TokenClass.SYMBOL))
        else:
            spans.append((i, i + 1, TokenClass.UNKNOWN))
        i = spans[-1][1]

    index = LineIndex(text)
    return [
        Token(kind, text[start:end], index.range(start, end))
        for start, end, kind in spans
    ]


def join(tokens: list[Token]) -> str:
    """Inverse of tokenize: concatenation of all token texts."""
    return "".join(t.text for t in tokens)
