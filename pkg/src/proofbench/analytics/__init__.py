"""Didactic measures computed over the telemetry log."""

from .measures import (
    AssociationCell,
    AssociationTable,
    CheckFrequency,
    DEFAULT_IDLE_THRESHOLD_MIN,
    DEFAULT_KEYWORD_TABLE,
    MistakeCategory,
    categorize,
    check_frequency,
    exercise_durations,
    message_mistake_association,
    rank_mistakes,
    semantic_mistakes,
)

__all__ = [
    "AssociationCell",
    "AssociationTable",
    "CheckFrequency",
    "DEFAULT_IDLE_THRESHOLD_MIN",
    "DEFAULT_KEYWORD_TABLE",
    "MistakeCategory",
    "categorize",
    "check_frequency",
    "exercise_durations",
    "message_mistake_association",
    "rank_mistakes",
    "semantic_mistakes",
]
