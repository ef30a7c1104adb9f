"""Study measures over the interaction log.

All functions are pure over a list of CheckEvents, so running them against
a live store or against an exported file gives identical answers. The
measures: mistake categorization and frequency ranking, the association
between shown messages and mistakes disappearing on the next check, check
frequency per student, and per-exercise time estimates.
"""

from __future__ import annotations

import fnmatch
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

from ..diagnostics import Diagnostic, DiagnosticSource
from ..telemetry import CheckEvent, EventKind

DEFAULT_IDLE_THRESHOLD_MIN = 15.0


class MistakeCategory(str, Enum):
    SYNTACTIC = "syntactic"
    TYPE_LEVEL = "type-level"
    TACTIC_LEVEL = "tactic-level"
    SEMANTIC = "semantic"
    OTHER = "other"


# Substring table mapping prover message text to a category. Order matters:
# first hit wins. Instructors can supply their own table.
DEFAULT_KEYWORD_TABLE: list[tuple[str, MistakeCategory]] = [
    ("Type unification failed", MistakeCategory.TYPE_LEVEL),
    ("Type error", MistakeCategory.TYPE_LEVEL),
    ("Failed to apply", MistakeCategory.TACTIC_LEVEL),
    ("Failed to finish proof", MistakeCategory.TACTIC_LEVEL),
    ("unfinished proof", MistakeCategory.TACTIC_LEVEL),
    ("Undefined", MistakeCategory.SYNTACTIC),
    ("Inner syntax error", MistakeCategory.SYNTACTIC),
    ("Outer syntax error", MistakeCategory.SYNTACTIC),
    ("Malformed", MistakeCategory.SYNTACTIC),
    ("Bad name", MistakeCategory.SYNTACTIC),
]


def categorize(
    diagnostic: Diagnostic,
    keyword_table: Sequence[tuple[str, MistakeCategory]] = tuple(DEFAULT_KEYWORD_TABLE),
) -> MistakeCategory:
    """Total categorization of one diagnostic.

    Structure and linter findings are syntactic by construction; prover
    messages go through the keyword table; anything unmatched is `other`.
    Semantic mistakes need per-exercise oracles and are never produced here.
    """
    if diagnostic.source in (DiagnosticSource.STRUCTURE, DiagnosticSource.LINTER):
        return MistakeCategory.SYNTACTIC
    for needle, category in keyword_table:
        if needle in diagnostic.message:
            return category
    return MistakeCategory.OTHER


def _result_events(events: Iterable[CheckEvent]) -> list[CheckEvent]:
    return [e for e in events if e.kind == EventKind.RESULT_RECEIVED]


def rank_mistakes(
    events: Iterable[CheckEvent],
    group_by: str = "all",
    keyword_table: Sequence[tuple[str, MistakeCategory]] = tuple(DEFAULT_KEYWORD_TABLE),
) -> dict[str, list[tuple[str, int]]]:
    """Mistake category counts over result events, most frequent first.

    group_by: "all" (single group ''), "user" or "activity".
    """
    if group_by not in ("all", "user", "activity"):
        raise ValueError(f"unsupported group_by: {group_by!r}")
    counters: dict[str, Counter] = defaultdict(Counter)
    for event in _result_events(events):
        if group_by == "user":
            key = event.user_id
        elif group_by == "activity":
            key = event.activity_id
        else:
            key = ""
        for diag in event.diagnostics:
            counters[key][categorize(diag, keyword_table).value] += 1
    return {
        key: sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
        for key, counter in counters.items()
    }


@dataclass
class AssociationCell:
    shown: int = 0
    disappeared: int = 0

    @property
    def ratio(self) -> float:
        return self.disappeared / self.shown if self.shown else 0.0


@dataclass
class AssociationTable:
    cells: dict[tuple[str, str], AssociationCell] = field(default_factory=dict)

    def cell(self, message_category: str, mistake_category: str) -> AssociationCell:
        return self.cells.setdefault((message_category, mistake_category), AssociationCell())

    def to_jsonable(self) -> list[dict]:
        rows = []
        for (msg, mistake), cell in sorted(self.cells.items()):
            rows.append(
                {
                    "message_category": msg,
                    "mistake_category": mistake,
                    "shown": cell.shown,
                    "disappeared": cell.disappeared,
                    "ratio": cell.ratio,
                }
            )
        return rows


def message_mistake_association(
    events: Iterable[CheckEvent],
    keyword_table: Sequence[tuple[str, MistakeCategory]] = tuple(DEFAULT_KEYWORD_TABLE),
) -> AssociationTable:
    """How often does a shown message category coincide with a mistake
    category vanishing by the next check of the same theory?

    For each chronologically consecutive pair of result events of the same
    (user, activity, theory), every (message category at step i, mistake
    category at step i) pair counts as shown, and as disappeared when that
    mistake category is absent at step i+1. A conditional frequency, not a
    causal claim.
    """
    table = AssociationTable()
    streams: dict[tuple[str, str, str], list[CheckEvent]] = defaultdict(list)
    for event in _result_events(events):
        streams[(event.user_id, event.activity_id, event.theory_name)].append(event)
    for stream in streams.values():
        stream.sort(key=lambda e: (e.timestamp_ms, e.event_id or 0))
        for current, following in zip(stream, stream[1:]):
            cats_now = {categorize(d, keyword_table).value for d in current.diagnostics}
            cats_next = {categorize(d, keyword_table).value for d in following.diagnostics}
            for message_category in sorted(cats_now):
                for mistake_category in sorted(cats_now):
                    cell = table.cell(message_category, mistake_category)
                    cell.shown += 1
                    if mistake_category not in cats_next:
                        cell.disappeared += 1
    return table


@dataclass
class CheckFrequency:
    total_checks: int
    active_minutes: float
    checks_per_active_hour: Optional[float]

    def to_jsonable(self) -> dict:
        return {
            "total_checks": self.total_checks,
            "active_minutes": self.active_minutes,
            "checks_per_active_hour": self.checks_per_active_hour,
        }


def check_frequency(
    events: Iterable[CheckEvent],
    user_id: str,
    idle_threshold_min: float = DEFAULT_IDLE_THRESHOLD_MIN,
) -> CheckFrequency:
    """Total check submissions and rate per active hour for one student.

    Active time sums the gaps between the student's consecutive events,
    skipping any gap longer than the idle threshold.
    """
    mine = sorted(
        (e for e in events if e.user_id == user_id),
        key=lambda e: (e.timestamp_ms, e.event_id or 0),
    )
    total = sum(1 for e in mine if e.kind == EventKind.CHECK_SUBMITTED)
    threshold_ms = idle_threshold_min * 60_000
    active_ms = 0.0
    for a, b in zip(mine, mine[1:]):
        gap = b.timestamp_ms - a.timestamp_ms
        if gap <= threshold_ms:
            active_ms += gap
    active_minutes = active_ms / 60_000
    rate = total / (active_ms / 3_600_000) if active_ms > 0 else None
    return CheckFrequency(total, active_minutes, rate)


def _exercise_index(theory_name: str, patterns: Sequence[str]) -> Optional[int]:
    for i, pattern in enumerate(patterns):
        if fnmatch.fnmatchcase(theory_name, pattern):
            return i
    return None


def exercise_durations(
    events: Iterable[CheckEvent],
    user_id: str,
    exercise_patterns: Sequence[str],
    idle_threshold_min: float = DEFAULT_IDLE_THRESHOLD_MIN,
) -> list[tuple[int, float]]:
    """(exercise index, minutes) estimates for one student.

    Assumes students move straight from one exercise to the next: exercise k
    spans from its first event to the first event of exercise k+1 (the last
    exercise ends at its own last event). Idle gaps longer than the
    threshold are subtracted.
    """
    mine = sorted(
        (e for e in events if e.user_id == user_id),
        key=lambda e: (e.timestamp_ms, e.event_id or 0),
    )
    first_ts: dict[int, int] = {}
    last_ts: dict[int, int] = {}
    for event in mine:
        idx = _exercise_index(event.theory_name, exercise_patterns)
        if idx is None:
            continue
        first_ts.setdefault(idx, event.timestamp_ms)
        last_ts[idx] = event.timestamp_ms

    threshold_ms = idle_threshold_min * 60_000

    def idle_between(start_ms: int, end_ms: int) -> float:
        skipped = 0.0
        for a, b in zip(mine, mine[1:]):
            if a.timestamp_ms >= start_ms and b.timestamp_ms <= end_ms:
                gap = b.timestamp_ms - a.timestamp_ms
                if gap > threshold_ms:
                    skipped += gap
        return skipped

    durations = []
    seen = sorted(first_ts)
    for pos, idx in enumerate(seen):
        start = first_ts[idx]
        if pos + 1 < len(seen):
            end = first_ts[seen[pos + 1]]
        else:
            end = last_ts[idx]
        span = max(0.0, end - start - idle_between(start, end))
        durations.append((idx, span / 60_000))
    return durations


def semantic_mistakes(
    events: Iterable[CheckEvent],
    exercise_oracles: dict[str, str],
) -> list[int]:
    """Event ids of clean checks whose snapshot proves a different statement.

    exercise_oracles maps a theory-name pattern to the expected statement
    text; a result event with no error diagnostics whose snapshot lacks the
    expected statement is flagged. Without oracles nothing is ever flagged.
    """
    flagged = []
    for event in _result_events(events):
        if any(d.severity.value == "error" for d in event.diagnostics):
            continue
        for pattern, expected in exercise_oracles.items():
            if not expected:
                continue
            if fnmatch.fnmatchcase(event.theory_name, pattern):
                if expected not in event.snapshot:
                    flagged.append(event.event_id or 0)
                break
    return flagged
