#!/usr/bin/env python3
"""Local-first records and review reports.

Seeds a throwaway store with a synthetic work week, then renders the daily
and weekly reviews: state distribution, hourly/daily trend, extractive
blockage and suggestion summaries, and next-step reminders. Records live
in day-sharded JSONL files you can open in any editor.
"""

import random
import tempfile
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

from mindmirror.domain import (
    CANONICAL_LABELS,
    EmotionLabel,
    ReflectionEntry,
    StepKind,
    SuggestionStep,
    ThreeStepSuggestion,
    make_record,
)
from mindmirror.reports import build_daily_report, build_weekly_report, recent_context
from mindmirror.store import SessionStore

BLOCKAGES = [
    "spec for the export format keeps changing",
    "flaky CI job hides real failures",
    "can't decide between two cache designs",
    "afternoon slump, rereading the same paragraph",
]

MOODS = [EmotionLabel.NEUTRAL, EmotionLabel.SAD, EmotionLabel.HAPPY, EmotionLabel.FEAR]


def seed(store: SessionStore, monday: date) -> None:
    rng = random.Random(7)
    for day_offset in range(5):  # a Monday..Friday of check-ins
        day = monday + timedelta(days=day_offset)
        for hour in (9, 11, 14, 16):
            if rng.random() < 0.2:
                continue
            state = rng.choice(MOODS)
            reflection = None
            suggestion = None
            if state is not EmotionLabel.HAPPY and rng.random() < 0.8:
                reflection = ReflectionEntry(
                    blockage=rng.choice(BLOCKAGES),
                    tried="took a short walk",
                    goal=f"wrap up task {day_offset * 4 + hour}",
                )
                steps = tuple(
                    SuggestionStep(kind=k, action=f"step for {state.value} at {hour}h",
                                   explanation="keeps the next move small")
                    for k in (StepKind.IMMEDIATE, StepKind.SHORT_TERM, StepKind.LONGER_TERM)
                )
                suggestion = ThreeStepSuggestion(steps=steps, raw_text="")
            when = datetime(day.year, day.month, day.day, hour, rng.randint(0, 59),
                            tzinfo=timezone.utc)
            store.save_record(make_record(state, reflection=reflection,
                                          suggestion=suggestion, timestamp=when))


def show(report) -> None:
    print(f"period        : {report.period_kind} {report.period_key}")
    print(f"total checks  : {report.total_checks}")
    dist = ", ".join(f"{l.value}={report.state_distribution[l]}"
                     for l in CANONICAL_LABELS if report.state_distribution[l])
    print(f"distribution  : {dist or '(empty)'}")
    busy = [b for b in report.trend if b.count]
    for bucket in busy[:6]:
        print(f"  {bucket.start:%a %H:%M}  {bucket.label.value:<8} x{bucket.count}")
    print("blockages     :")
    for text in report.blockage_summaries:
        print(f"  - {text}")
    print("next steps    :")
    for text in report.next_steps:
        print(f"  - {text}")


def main() -> None:
    with tempfile.TemporaryDirectory() as scratch:
        store = SessionStore(Path(scratch) / "records")
        monday = date.fromisocalendar(2025, 12, 1)
        seed(store, monday)

        files = sorted(p.name for p in store.root.glob("*.jsonl"))
        print(f"day files written: {', '.join(files)}\n")

        print("=== daily review (Wednesday) ===")
        show(build_daily_report(store, monday + timedelta(days=2)))

        print("\n=== weekly review ===")
        show(build_weekly_report(store, 2025, 12))

        now = datetime(monday.year, monday.month, monday.day, tzinfo=timezone.utc) + timedelta(days=5)
        print("\n=== recent context fed into the next prompt ===")
        print(recent_context(store, now) or "(empty)")


if __name__ == "__main__":
    main()
