"""Analysis CLI over an exported telemetry file.

    proofbench-analyze EXPORT rank [--group-by all|user|activity]
    proofbench-analyze EXPORT assoc
    proofbench-analyze EXPORT freq --user U [--idle-threshold MIN]
    proofbench-analyze EXPORT durations --user U --exercises "Ex1*,Ex2*" [--idle-threshold MIN]

Common filters: --user, --activity. Output is JSON on stdout (add --text
for a plain-text report).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..telemetry import EventFilter, read_export
from .measures import (
    DEFAULT_IDLE_THRESHOLD_MIN,
    check_frequency,
    exercise_durations,
    message_mistake_association,
    rank_mistakes,
)


def _load_events(path: str, user: str | None, activity: str | None):
    with open(path, "r", encoding="utf-8") as fh:
        events = read_export(fh)
    f = EventFilter(user_id=user, activity_id=activity)
    return [e for e in events if f.matches(e)]


def run_rank(events, args) -> dict:
    return {"measure": "rank", "groups": rank_mistakes(events, group_by=args.group_by)}


def run_assoc(events, args) -> dict:
    return {"measure": "assoc", "table": message_mistake_association(events).to_jsonable()}


def run_freq(events, args) -> dict:
    if not args.user:
        raise SystemExit("freq requires --user")
    freq = check_frequency(events, args.user, idle_threshold_min=args.idle_threshold)
    return {"measure": "freq", "user": args.user, **freq.to_jsonable()}


def run_durations(events, args) -> dict:
    if not args.user:
        raise SystemExit("durations requires --user")
    patterns = _exercise_patterns(args)
    durations = exercise_durations(
        events, args.user, patterns, idle_threshold_min=args.idle_threshold
    )
    return {
        "measure": "durations",
        "user": args.user,
        "exercises": [
            {"index": idx, "pattern": patterns[idx], "minutes": minutes}
            for idx, minutes in durations
        ],
    }


def _exercise_patterns(args) -> list[str]:
    if args.exercises:
        return [p.strip() for p in args.exercises.split(",") if p.strip()]
    if args.config:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        return [e["pattern"] for e in config.get("exercises", [])]
    raise SystemExit("durations requires --exercises or --config")


def _text_report(result: dict) -> str:
    lines = [f"measure: {result['measure']}"]
    if result["measure"] == "rank":
        for group, counts in sorted(result["groups"].items()):
            label = group or "(all)"
            lines.append(f"  {label}:")
            for category, count in counts:
                lines.append(f"    {category:<14} {count}")
    elif result["measure"] == "assoc":
        lines.append(f"  {'message':<14} {'mistake':<14} {'shown':>6} {'gone':>6} ratio")
        for row in result["table"]:
            lines.append(
                f"  {row['message_category']:<14} {row['mistake_category']:<14}"
                f" {row['shown']:>6} {row['disappeared']:>6} {row['ratio']:.2f}"
            )
    elif result["measure"] == "freq":
        lines.append(f"  user: {result['user']}")
        lines.append(f"  total checks: {result['total_checks']}")
        lines.append(f"  active minutes: {result['active_minutes']:.1f}")
        rate = result["checks_per_active_hour"]
        lines.append(f"  checks per active hour: {'n/a' if rate is None else f'{rate:.2f}'}")
    elif result["measure"] == "durations":
        for row in result["exercises"]:
            lines.append(f"  exercise {row['index']} ({row['pattern']}): {row['minutes']:.1f} min")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="proofbench-analyze", description=__doc__)
    parser.add_argument("export", help="telemetry export file (line-delimited JSON)")
    parser.add_argument("measure", choices=["rank", "assoc", "freq", "durations"])
    parser.add_argument("--user", default=None)
    parser.add_argument("--activity", default=None)
    parser.add_argument("--group-by", default="all", choices=["all", "user", "activity"])
    parser.add_argument(
        "--idle-threshold",
        type=float,
        default=DEFAULT_IDLE_THRESHOLD_MIN,
        help="minutes of inactivity treated as a break (0 disables the guard)",
    )
    parser.add_argument("--exercises", default=None, help="comma-separated theory-name patterns")
    parser.add_argument("--config", default=None, help="activity config JSON with exercise order")
    parser.add_argument("--text", action="store_true", help="plain-text report instead of JSON")
    args = parser.parse_args(argv)

    events = _load_events(args.export, args.user, args.activity)
    runner = {
        "rank": run_rank,
        "assoc": run_assoc,
        "freq": run_freq,
        "durations": run_durations,
    }[args.measure]
    result = runner(events, args)
    if args.text:
        print(_text_report(result))
    else:
        json.dump(result, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
