"""Daily/weekly review reports aggregated from session records.

Reports are pure functions of the record set: distribution and trend count
confirmed states only (never the raw detected cue), summaries are
extractive snippets from the most recent records, and next steps come from
recent reflection goals. Everything works offline; no LLM involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from typing import Any, Iterable, Optional, Sequence

from .domain import CANONICAL_LABELS, EmotionLabel, SessionRecord
from .store import SessionStore

BLOCKAGE_SNIPPETS = 5
SUGGESTION_SNIPPETS = 5
NEXT_STEPS = 3
SNIPPET_MAX_CHARS = 200
RECENT_CONTEXT_RECORDS = 3


@dataclass(frozen=True)
class TrendBucket:
    """One trend slot: bucket start, modal confirmed state, record count.

    label is None for empty buckets; modal ties break by canonical order.
    """

    start: datetime
    label: Optional[EmotionLabel]
    count: int

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "start": self.start.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "count": self.count,
        }
        if self.label is not None:
            data["label"] = self.label.value
        return data


@dataclass(frozen=True)
class ReviewReport:
    period_kind: str  # "daily" | "weekly"
    period_key: str   # "2025-01-15" | "2025-W03"
    state_distribution: dict[EmotionLabel, int]
    trend: tuple[TrendBucket, ...]
    blockage_summaries: tuple[str, ...]
    suggestion_summaries: tuple[str, ...]
    next_steps: tuple[str, ...]
    total_checks: int

    def to_json(self) -> dict[str, Any]:
        period: dict[str, Any] = {"kind": self.period_kind}
        period["date" if self.period_kind == "daily" else "week"] = self.period_key
        return {
            "period": period,
            "state_distribution": {l.value: self.state_distribution[l] for l in CANONICAL_LABELS},
            "trend": [b.to_json() for b in self.trend],
            "blockage_summaries": list(self.blockage_summaries),
            "suggestion_summaries": list(self.suggestion_summaries),
            "next_steps": list(self.next_steps),
            "total_checks": self.total_checks,
        }


def state_distribution(records: Iterable[SessionRecord]) -> dict[EmotionLabel, int]:
    """Count confirmed states. Always returns all 7 labels (zeros included)."""
    counts = {label: 0 for label in CANONICAL_LABELS}
    for record in records:
        counts[record.confirmed_state] += 1
    return counts


def _modal_label(records: Sequence[SessionRecord]) -> Optional[EmotionLabel]:
    if not records:
        return None
    counts = state_distribution(records)
    best = max(CANONICAL_LABELS, key=lambda l: counts[l])
    # max() keeps the earliest canonical label on ties
    return best


def _buckets(records: Sequence[SessionRecord], starts: Sequence[datetime],
             width: timedelta) -> tuple[TrendBucket, ...]:
    out = []
    for start in starts:
        end = start + width
        inside = [r for r in records if start <= r.timestamp < end]
        out.append(TrendBucket(start=start, label=_modal_label(inside), count=len(inside)))
    return tuple(out)


def _sorted_desc(records: Iterable[SessionRecord]) -> list[SessionRecord]:
    return sorted(records, key=lambda r: (r.timestamp, r.id), reverse=True)


def _summaries(records: Sequence[SessionRecord]) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
    newest_first = _sorted_desc(records)
    blockages = [
        r.reflection.blockage.strip()[:SNIPPET_MAX_CHARS]
        for r in newest_first
        if r.reflection is not None and r.reflection.blockage.strip()
    ][:BLOCKAGE_SNIPPETS]
    suggestions = [
        r.suggestion.steps[0].action
        for r in newest_first
        if r.suggestion is not None and len(r.suggestion.steps) == 3
    ][:SUGGESTION_SNIPPETS]
    goals = [
        r.reflection.goal.strip()
        for r in newest_first
        if r.reflection is not None and r.reflection.goal.strip()
    ][:NEXT_STEPS]
    return tuple(blockages), tuple(suggestions), tuple(goals)


def compute_daily_report(records: Sequence[SessionRecord], day: date) -> ReviewReport:
    """Daily report with 24 one-hour trend buckets covering the UTC day."""
    day_start = datetime.combine(day, time.min, tzinfo=timezone.utc)
    inside = [r for r in records if day_start <= r.timestamp < day_start + timedelta(days=1)]
    starts = [day_start + timedelta(hours=h) for h in range(24)]
    blockages, suggestions, goals = _summaries(inside)
    return ReviewReport(
        period_kind="daily",
        period_key=day.isoformat(),
        state_distribution=state_distribution(inside),
        trend=_buckets(inside, starts, timedelta(hours=1)),
        blockage_summaries=blockages,
        suggestion_summaries=suggestions,
        next_steps=goals,
        total_checks=len(inside),
    )


def iso_week_key(year: int, week: int) -> str:
    return f"{year:04d}-W{week:02d}"


def parse_iso_week(key: str) -> tuple[int, int]:
    """Parse '2025-W03' into (2025, 3); raises ValueError on bad input."""
    year_part, sep, week_part = key.partition("-W")
    if not sep or len(year_part) != 4 or not year_part.isdigit() or not week_part.isdigit():
        raise ValueError(f"not an ISO week key: {key!r}")
    year, week = int(year_part), int(week_part)
    # validates the week number for that year
    date.fromisocalendar(year, week, 1)
    return year, week


def compute_weekly_report(records: Sequence[SessionRecord], year: int, week: int) -> ReviewReport:
    """Weekly report with 7 day buckets, Monday-start ISO week, UTC dates."""
    monday = date.fromisocalendar(year, week, 1)
    week_start = datetime.combine(monday, time.min, tzinfo=timezone.utc)
    inside = [r for r in records if week_start <= r.timestamp < week_start + timedelta(days=7)]
    starts = [week_start + timedelta(days=d) for d in range(7)]
    blockages, suggestions, goals = _summaries(inside)
    return ReviewReport(
        period_kind="weekly",
        period_key=iso_week_key(year, week),
        state_distribution=state_distribution(inside),
        trend=_buckets(inside, starts, timedelta(days=1)),
        blockage_summaries=blockages,
        suggestion_summaries=suggestions,
        next_steps=goals,
        total_checks=len(inside),
    )


def build_daily_report(store: SessionStore, day: date) -> ReviewReport:
    start = datetime.combine(day, time.min, tzinfo=timezone.utc)
    return compute_daily_report(store.list_records(start, start + timedelta(days=1)), day)


def build_weekly_report(store: SessionStore, year: int, week: int) -> ReviewReport:
    monday = date.fromisocalendar(year, week, 1)
    start = datetime.combine(monday, time.min, tzinfo=timezone.utc)
    return compute_weekly_report(store.list_records(start, start + timedelta(days=7)), year, week)


def recent_context(store: SessionStore, now: datetime, k: int = RECENT_CONTEXT_RECORDS) -> str:
    """Render the last k records (state + goal), one line each, newest last.

    Feeds the prompt's session_context slot; empty store renders "".
    """
    eligible = [r for r in store.all_records() if r.timestamp <= now]
    recent = eligible[-k:] if k > 0 else []
    lines = []
    for record in recent:
        line = f"- state: {record.confirmed_state.value}"
        if record.reflection is not None and record.reflection.goal.strip():
            line += f"; goal: {record.reflection.goal.strip()}"
        lines.append(line)
    return "\n".join(lines)
