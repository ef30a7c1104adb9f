"""Per-activity configuration: language restrictions, rule references,
symbol keyboard, exercise ordering and the optional exercise sheet PDF.

Configs are declarative JSON files in a config directory, ingested at
startup and editable through the instructor endpoint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .linting import LinterSettings


@dataclass
class RuleEntry:
    name: str
    statement: str

    def to_dict(self) -> dict:
        return {"name": self.name, "statement": self.statement}


@dataclass
class RuleGroup:
    group: str
    entries: list[RuleEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"group": self.group, "entries": [e.to_dict() for e in self.entries]}


@dataclass
class SymbolKey:
    glyph: str
    insert: str

    def to_dict(self) -> dict:
        return {"glyph": self.glyph, "insert": self.insert}


@dataclass
class Exercise:
    """One exercise slot: theory documents matching `pattern` belong to it."""

    pattern: str
    title: str = ""
    expected_statement: str = ""  # semantic oracle; empty means none

    def to_dict(self) -> dict:
        return {
            "pattern": self.pattern,
            "title": self.title,
            "expected_statement": self.expected_statement,
        }


@dataclass
class ActivityConfig:
    id: str
    title: str
    exercises: list[Exercise] = field(default_factory=list)
    linter: LinterSettings = field(default_factory=LinterSettings)
    rule_reference: list[RuleGroup] = field(default_factory=list)
    symbol_keyboard: list[SymbolKey] = field(default_factory=list)
    pdf: Optional[str] = None
    linter_toggle_allowed: bool = True

    def __post_init__(self):
        for group in self.rule_reference:
            names = [e.name for e in group.entries]
            if len(names) != len(set(names)):
                raise ValueError(f"duplicate rule names in group {group.group!r}")
        for key in self.symbol_keyboard:
            if not key.insert:
                raise ValueError(f"symbol {key.glyph!r} has an empty insertion text")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "exercises": [e.to_dict() for e in self.exercises],
            "linter": self.linter.to_dict(),
            "rule_reference": [g.to_dict() for g in self.rule_reference],
            "symbol_keyboard": [k.to_dict() for k in self.symbol_keyboard],
            "pdf": self.pdf,
            "linter_toggle_allowed": self.linter_toggle_allowed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ActivityConfig":
        return cls(
            id=d["id"],
            title=d.get("title", d["id"]),
            exercises=[
                Exercise(
                    pattern=e["pattern"],
                    title=e.get("title", ""),
                    expected_statement=e.get("expected_statement", ""),
                )
                for e in d.get("exercises", [])
            ],
            linter=LinterSettings.from_dict(d.get("linter", {})),
            rule_reference=[
                RuleGroup(
                    group=g["group"],
                    entries=[
                        RuleEntry(name=e["name"], statement=e.get("statement", ""))
                        for e in g.get("entries", [])
                    ],
                )
                for g in d.get("rule_reference", [])
            ],
            symbol_keyboard=[
                SymbolKey(glyph=k["glyph"], insert=k["insert"])
                for k in d.get("symbol_keyboard", [])
            ],
            pdf=d.get("pdf"),
            linter_toggle_allowed=bool(d.get("linter_toggle_allowed", True)),
        )


def demo_activity() -> ActivityConfig:
    """Ships with the server so a fresh install is immediately usable."""
    return ActivityConfig(
        id="demo-propositional",
        title="Propositional logic warm-up",
        exercises=[
            Exercise(pattern="Ex1*", title="Conjunction"),
            Exercise(pattern="Ex2*", title="Implication"),
            Exercise(pattern="Ex3*", title="Disjunction"),
        ],
        linter=LinterSettings(builtins=["no-automation"], student_toggleable=True),
        rule_reference=[
            RuleGroup(
                group="Propositional",
                entries=[
                    RuleEntry("conjI", "A ⟹ B ⟹ A ∧ B"),
                    RuleEntry("conjE", "A ∧ B ⟹ (A ⟹ B ⟹ C) ⟹ C"),
                    RuleEntry("disjI1", "A ⟹ A ∨ B"),
                    RuleEntry("disjI2", "B ⟹ A ∨ B"),
                    RuleEntry("impI", "(A ⟹ B) ⟹ A ⟶ B"),
                    RuleEntry("mp", "A ⟶ B ⟹ A ⟹ B"),
                    RuleEntry("notI", "(A ⟹ False) ⟹ ¬ A"),
                ],
            )
        ],
        symbol_keyboard=[
            SymbolKey("∧", "\\<and>"),
            SymbolKey("∨", "\\<or>"),
            SymbolKey("¬", "\\<not>"),
            SymbolKey("⟶", "\\<longrightarrow>"),
            SymbolKey("⟹", "\\<Longrightarrow>"),
            SymbolKey("∀", "\\<forall>"),
            SymbolKey("∃", "\\<exists>"),
            SymbolKey("⋀", "\\<And>"),
        ],
        pdf=None,
        linter_toggle_allowed=True,
    )


class ActivityRegistry:
    """Loads activity files from a directory and persists updates back."""

    def __init__(self, config_dir: Union[str, Path], seed_demo: bool = True):
        self._dir = Path(config_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._activities: dict[str, ActivityConfig] = {}
        self.reload()
        if seed_demo and not self._activities:
            self.save(demo_activity())

    def reload(self) -> None:
        self._activities = {}
        for path in sorted(self._dir.glob("*.json")):
            config = ActivityConfig.from_dict(json.loads(path.read_text(encoding="utf-8")))
            self._activities[config.id] = config

    def save(self, config: ActivityConfig) -> None:
        path = self._dir / f"{config.id}.json"
        path.write_text(
            json.dumps(config.to_dict(), ensure_ascii=False, indent=2), encoding="utf-8"
        )
        self._activities[config.id] = config

    def get(self, activity_id: str) -> Optional[ActivityConfig]:
        return self._activities.get(activity_id)

    def all(self) -> list[ActivityConfig]:
        return sorted(self._activities.values(), key=lambda a: a.id)
