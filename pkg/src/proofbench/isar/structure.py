"""Structural pre-assessment over the token stream.

Catches the breakage worth rejecting before a prover sees the theory:
unbalanced brackets (also inside quoted inner syntax), unterminated
comments/quotations, proof blocks without qed and missing theory headers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from ..ranges import LineIndex, SourceRange
from .lexer import Token, TokenClass

_OPEN = "([{"
_CLOSE = ")]}"
_MATCH = {")": "(", "]": "[", "}": "{"}


class StructureCode(str, Enum):
    UNBALANCED_BRACKET = "unbalanced-bracket"
    UNCLOSED_COMMENT = "unclosed-comment"
    UNCLOSED_STRING = "unclosed-string"
    PROOF_WITHOUT_QED = "proof-without-qed"
    QED_WITHOUT_PROOF = "qed-without-proof"
    MISSING_THEORY_HEADER = "missing-theory-header"


@dataclass(frozen=True)
class StructureDiagnostic:
    code: StructureCode
    range: SourceRange
    message: str


def _comment_closed(text: str) -> bool:
    depth = 0
    i = 0
    n = len(text)
    while i < n:
        if text.startswith("(*", i):
            depth += 1
            i += 2
        elif text.startswith("*)", i):
            depth -= 1
            i += 2
        else:
            i += 1
    return depth == 0


def _string_closed(text: str) -> bool:
    i = 1
    n = len(text)
    while i < n:
        if text[i] == "\\" and i + 1 < n:
            i += 2
            continue
        if text[i] == '"':
            return True
        i += 1
    return False


def _cartouche_closed(text: str) -> bool:
    depth = 0
    for ch in text:
        if ch == "‹":
            depth += 1
        elif ch == "›":
            depth -= 1
    return depth == 0


def _subrange(token: Token, start: int, end: int) -> SourceRange:
    """Range of token.text[start:end] in document coordinates."""
    index = LineIndex(token.text)
    line, col = index.position(start)
    end_line, end_col = index.position(end)
    base_line = token.range.line
    base_col = token.range.col
    return SourceRange(
        base_line + line - 1,
        base_col + col if line == 1 else col,
        base_line + end_line - 1,
        base_col + end_col if end_line == 1 else end_col,
    )


def _check_quoted_brackets(token: Token, out: list[StructureDiagnostic]) -> None:
    """Bracket balance inside one quotation (string literal or cartouche)."""
    stack: list[tuple[str, int]] = []
    for i, ch in enumerate(token.text):
        if ch in _OPEN:
            stack.append((ch, i))
        elif ch in _CLOSE:
            if stack and stack[-1][0] == _MATCH[ch]:
                stack.pop()
            else:
                out.append(
                    StructureDiagnostic(
                        StructureCode.UNBALANCED_BRACKET,
                        _subrange(token, i, i + 1),
                        f"'{ch}' has no matching opening bracket",
                    )
                )
    for ch, i in stack:
        out.append(
            StructureDiagnostic(
                StructureCode.UNBALANCED_BRACKET,
                _subrange(token, i, i + 1),
                f"'{ch}' is never closed",
            )
        )


def _significant(tokens: list[Token]) -> list[Token]:
    return [
        t
        for t in tokens
        if t.kind not in (TokenClass.WHITESPACE, TokenClass.COMMENT)
    ]


def _check_theory_header(tokens: list[Token], out: list[StructureDiagnostic]) -> None:
    sig = _significant(tokens)
    if not sig:
        out.append(
            StructureDiagnostic(
                StructureCode.MISSING_THEORY_HEADER,
                SourceRange(1, 0, 1, 0),
                "theory must start with 'theory <name> imports ... begin'",
            )
        )
        return

    def fail(at: Token, what: str) -> None:
        out.append(
            StructureDiagnostic(
                StructureCode.MISSING_THEORY_HEADER,
                at.range,
                f"malformed theory header: {what}",
            )
        )

    it = iter(sig)
    first = next(it)
    if not (first.kind == TokenClass.COMMAND_KEYWORD and first.text == "theory"):
        fail(first, "file must begin with 'theory'")
        return
    name = next(it, None)
    if name is None or name.kind != TokenClass.IDENTIFIER:
        fail(name or first, "expected a theory name after 'theory'")
        return
    imports_kw = next(it, None)
    if imports_kw is None or imports_kw.text != "imports":
        fail(imports_kw or name, "expected 'imports' after the theory name")
        return
    # imported theory names: identifiers possibly dotted (HOL.Main)
    tok = next(it, None)
    seen_import = False
    while tok is not None and tok.kind == TokenClass.IDENTIFIER:
        seen_import = True
        tok = next(it, None)
        while tok is not None and tok.kind == TokenClass.SYMBOL and tok.text == ".":
            tok = next(it, None)  # qualified part
            if tok is not None and tok.kind == TokenClass.IDENTIFIER:
                tok = next(it, None)
    if not seen_import:
        fail(tok or imports_kw, "expected at least one imported theory")
        return
    if tok is None or not (tok.kind == TokenClass.COMMAND_KEYWORD and tok.text == "begin"):
        fail(tok or imports_kw, "expected 'begin' after the imports")
        return
    last = sig[-1]
    if not (last.kind == TokenClass.COMMAND_KEYWORD and last.text == "end"):
        fail(last, "theory must close with 'end'")


def check_structure(tokens: list[Token]) -> list[StructureDiagnostic]:
    """All bracket/quotation/proof-block/header violations in the stream."""
    out: list[StructureDiagnostic] = []

    for tok in tokens:
        if tok.kind == TokenClass.COMMENT and not _comment_closed(tok.text):
            out.append(
                StructureDiagnostic(
                    StructureCode.UNCLOSED_COMMENT, tok.range, "comment is never closed"
                )
            )
        elif tok.kind == TokenClass.STRING_LITERAL and not _string_closed(tok.text):
            out.append(
                StructureDiagnostic(
                    StructureCode.UNCLOSED_STRING, tok.range, "string literal is never closed"
                )
            )
        elif tok.kind == TokenClass.CARTOUCHE and not _cartouche_closed(tok.text):
            out.append(
                StructureDiagnostic(
                    StructureCode.UNCLOSED_STRING, tok.range, "cartouche is never closed"
                )
            )

    # Brackets in outer syntax pair across tokens; each quotation is its own scope.
    bracket_stack: list[tuple[str, SourceRange]] = []
    for tok in tokens:
        if tok.kind == TokenClass.SYMBOL and tok.text in _OPEN:
            bracket_stack.append((tok.text, tok.range))
        elif tok.kind == TokenClass.SYMBOL and tok.text in _CLOSE:
            if bracket_stack and bracket_stack[-1][0] == _MATCH[tok.text]:
                bracket_stack.pop()
            else:
                out.append(
                    StructureDiagnostic(
                        StructureCode.UNBALANCED_BRACKET,
                        tok.range,
                        f"'{tok.text}' has no matching opening bracket",
                    )
                )
        elif tok.kind in (TokenClass.STRING_LITERAL, TokenClass.CARTOUCHE):
            _check_quoted_brackets(tok, out)
    for ch, rng in bracket_stack:
        out.append(
            StructureDiagnostic(
                StructureCode.UNBALANCED_BRACKET, rng, f"'{ch}' is never closed"
            )
        )

    proof_stack: list[Token] = []
    for tok in tokens:
        if tok.kind != TokenClass.COMMAND_KEYWORD:
            continue
        if tok.text == "proof":
            proof_stack.append(tok)
        elif tok.text == "qed":
            if proof_stack:
                proof_stack.pop()
            else:
                out.append(
                    StructureDiagnostic(
                        StructureCode.QED_WITHOUT_PROOF,
                        tok.range,
                        "'qed' closes no open 'proof'",
                    )
                )
    for tok in proof_stack:
        out.append(
            StructureDiagnostic(
                StructureCode.PROOF_WITHOUT_QED,
                tok.range,
                "'proof' is never closed by 'qed'",
            )
        )

    _check_theory_header(tokens, out)
    out.sort(key=lambda d: (d.range.line, d.range.col))
    return out


def fold_regions(tokens: list[Token]) -> list[tuple[int, int]]:
    """(start-line, end-line) per matched proof...qed block, outermost first."""
    regions: list[tuple[int, int]] = []
    stack: list[Token] = []
    for tok in tokens:
        if tok.kind != TokenClass.COMMAND_KEYWORD:
            continue
        if tok.text == "proof":
            stack.append(tok)
        elif tok.text == "qed" and stack:
            opener = stack.pop()
            regions.append((opener.range.line, tok.range.line))
    regions.sort()
    return regions


def theory_header_name(tokens: list[Token]) -> Optional[str]:
    """The name declared by the 'theory <name>' header, if one is present."""
    sig = _significant(tokens)
    if (
        len(sig) >= 2
        and sig[0].kind == TokenClass.COMMAND_KEYWORD
        and sig[0].text == "theory"
        and sig[1].kind == TokenClass.IDENTIFIER
    ):
        return sig[1].text
    return None
