"""Positioned diagnostics, shared by the linter, structure checks and prover results."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .ranges import SourceRange


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


class DiagnosticSource(str, Enum):
    LINTER = "linter"
    STRUCTURE = "structure"
    PROVER = "prover"


@dataclass
class Diagnostic:
    source: DiagnosticSource
    severity: Severity
    message: str
    range: Optional[SourceRange] = None
    rule_id: Optional[str] = None
    theory_name: str = ""

    def to_dict(self) -> dict:
        return {
            "source": self.source.value,
            "severity": self.severity.value,
            "message": self.message,
            "range": self.range.to_dict() if self.range else None,
            "rule_id": self.rule_id,
            "theory_name": self.theory_name,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Diagnostic":
        return cls(
            source=DiagnosticSource(d["source"]),
            severity=Severity(d["severity"]),
            message=d["message"],
            range=SourceRange.from_dict(d["range"]) if d.get("range") else None,
            rule_id=d.get("rule_id"),
            theory_name=d.get("theory_name", ""),
        )
