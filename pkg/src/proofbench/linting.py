"""Regex linting over the token stream, configurable per learning activity.

Rules match token text, never raw source, so occurrences inside comments,
string literals and cartouches can never fire. Diagnostics are advisory:
they do not stop a theory from being sent to the prover unless an activity
explicitly enforces them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .diagnostics import Diagnostic, DiagnosticSource, Severity
from .isar.lexer import Token, TokenClass, tokenize
from .ranges import LineIndex, SourceRange

# Token classes rules are applied to. Quoted material and comments are
# excluded by construction.
LINTABLE = (
    TokenClass.COMMAND_KEYWORD,
    TokenClass.INNER_KEYWORD,
    TokenClass.IDENTIFIER,
    TokenClass.SYMBOL,
    TokenClass.UNKNOWN,
)


class InvalidPatternError(ValueError):
    def __init__(self, rule_id: str, pattern: str, position: int, reason: str):
        super().__init__(f"rule '{rule_id}': invalid pattern at position {position}: {reason}")
        self.rule_id = rule_id
        self.pattern = pattern
        self.position = position


@dataclass(frozen=True)
class LintRule:
    id: str
    pattern: re.Pattern
    severity: Severity
    message_template: str

    def message_for(self, match_text: str) -> str:
        return self.message_template.replace("{match}", match_text)


@dataclass
class Ruleset:
    rules: list[LintRule] = field(default_factory=list)
    student_toggleable: bool = True
    enforce: bool = False


@dataclass
class LinterSettings:
    """The linter section of an activity configuration."""

    builtins: list[str] = field(default_factory=list)
    rules: list[dict] = field(default_factory=list)  # {id, pattern, severity, message}
    student_toggleable: bool = True
    enforce: bool = False

    def to_dict(self) -> dict:
        return {
            "builtins": list(self.builtins),
            "rules": [dict(r) for r in self.rules],
            "student_toggleable": self.student_toggleable,
            "enforce": self.enforce,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinterSettings":
        return cls(
            builtins=list(d.get("builtins", [])),
            rules=[dict(r) for r in d.get("rules", [])],
            student_toggleable=bool(d.get("student_toggleable", True)),
            enforce=bool(d.get("enforce", False)),
        )


_AUTOMATIC_TACTICS = ("auto", "simp", "arith", "blast")

# Builtin rule groups instructors can reference by name.
BUILTIN_RULES: dict[str, list[dict]] = {
    "no-automation": [
        {
            "id": f"no-automation/{tactic}",
            "pattern": rf"\A{tactic}\Z",
            "severity": "warning",
            "message": f"automatic tactic '{tactic}' is restricted in this activity",
        }
        for tactic in _AUTOMATIC_TACTICS
    ],
}


def _compile_rule(spec: dict) -> LintRule:
    rule_id = spec.get("id", "")
    if not rule_id:
        raise InvalidPatternError("<unnamed>", spec.get("pattern", ""), 0, "rule id missing")
    try:
        pattern = re.compile(spec["pattern"])
    except re.error as exc:
        raise InvalidPatternError(
            rule_id, spec["pattern"], exc.pos or 0, exc.msg
        ) from exc
    return LintRule(
        id=rule_id,
        pattern=pattern,
        severity=Severity(spec.get("severity", "warning")),
        message_template=spec.get("message", f"matched restricted pattern ({rule_id})"),
    )


def compile_ruleset(settings: LinterSettings) -> Ruleset:
    """Expand builtin references and compile every pattern.

    Raises InvalidPatternError naming the offending rule and position.
    """
    specs: list[dict] = []
    for name in settings.builtins:
        if name not in BUILTIN_RULES:
            raise InvalidPatternError(name, "", 0, f"unknown builtin ruleset '{name}'")
        specs.extend(BUILTIN_RULES[name])
    specs.extend(settings.rules)

    rules = [_compile_rule(spec) for spec in specs]
    seen: set[str] = set()
    for rule in rules:
        if rule.id in seen:
            raise InvalidPatternError(rule.id, rule.pattern.pattern, 0, "duplicate rule id")
        seen.add(rule.id)
    return Ruleset(
        rules=rules,
        student_toggleable=settings.student_toggleable,
        enforce=settings.enforce,
    )


def _match_range(token: Token, start: int, end: int) -> SourceRange:
    if start == 0 and end == len(token.text):
        return token.range
    index = LineIndex(token.text)
    line, col = index.position(start)
    end_line, end_col = index.position(end)
    return SourceRange(
        token.range.line + line - 1,
        token.range.col + col if line == 1 else col,
        token.range.line + end_line - 1,
        token.range.col + end_col if end_line == 1 else end_col,
    )


def lint(
    text: str,
    ruleset: Ruleset,
    tokens: Optional[list[Token]] = None,
    theory_name: str = "",
) -> list[Diagnostic]:
    """One diagnostic per rule match on lintable tokens, in source order."""
    if tokens is None:
        tokens = tokenize(text)
    out: list[Diagnostic] = []
    for token in tokens:
        if token.kind not in LINTABLE:
            continue
        for rule in ruleset.rules:
            for m in rule.pattern.finditer(token.text):
                out.append(
                    Diagnostic(
                        source=DiagnosticSource.LINTER,
                        severity=rule.severity,
                        message=rule.message_for(m.group(0)),
                        range=_match_range(token, m.start(), m.end()),
                        rule_id=rule.id,
                        theory_name=theory_name,
                    )
                )
    out.sort(key=lambda d: (d.range.line, d.range.col, d.rule_id or ""))
    return out
