"""Shared vocabulary types for state-reflection records.

Every other module speaks in these types. They are immutable values, safe
to share between threads. Canonical JSON serialization uses snake_case
keys and omits absent optional fields (never writes null for them).
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Mapping, Optional

SCHEMA_VERSION = 1

# Scores must sum to 1 within this tolerance to count as a probability vector.
SCORE_SUM_TOLERANCE = 1e-6


class EmotionLabel(str, Enum):
    """The seven expression classes, in canonical order.

    Canonical order is fixed (definition order below) and is used for
    argmax tie-breaking and as the axis order of confusion matrices.
    The serialized form is the lowercase English word.
    """

    ANGRY = "angry"
    DISGUST = "disgust"
    FEAR = "fear"
    HAPPY = "happy"
    NEUTRAL = "neutral"
    SAD = "sad"
    SURPRISE = "surprise"


CANONICAL_LABELS: tuple[EmotionLabel, ...] = tuple(EmotionLabel)


def argmax_label(scores: Mapping[EmotionLabel, float]) -> EmotionLabel:
    """Label with the highest score; ties go to the earliest canonical label."""
    best: Optional[EmotionLabel] = None
    best_score = float("-inf")
    for label in CANONICAL_LABELS:
        score = scores.get(label, float("-inf"))
        if score > best_score:
            best = label
            best_score = score
    if best is None:
        raise ValueError("empty score vector")
    return best


def new_record_id() -> str:
    """128-bit random identifier rendered as 32 hex characters."""
    return secrets.token_hex(16)


def utc_now() -> datetime:
    """Current UTC instant truncated to second precision."""
    return datetime.now(timezone.utc).replace(microsecond=0)


@dataclass(frozen=True)
class EmotionPrediction:
    """Model-side cue: argmax label plus the full 7-class score vector."""

    label: EmotionLabel
    scores: Mapping[EmotionLabel, float]
    model_id: str

    def violations(self) -> list[str]:
        out: list[str] = []
        missing = [l.value for l in CANONICAL_LABELS if l not in self.scores]
        if missing:
            out.append(f"scores missing entries for: {', '.join(missing)}")
            return out
        for label in CANONICAL_LABELS:
            s = self.scores[label]
            if not (0.0 <= s <= 1.0):
                out.append(f"score for {label.value} outside [0, 1]: {s}")
        total = sum(self.scores[l] for l in CANONICAL_LABELS)
        if abs(total - 1.0) > SCORE_SUM_TOLERANCE:
            out.append(f"scores sum to {total}, not 1 within tolerance")
        if not out and self.label is not argmax_label(self.scores):
            out.append("label is not the argmax of scores")
        return out

    def to_json(self) -> dict[str, Any]:
        return {
            "label": self.label.value,
            "scores": {l.value: float(self.scores[l]) for l in CANONICAL_LABELS if l in self.scores},
            "model_id": self.model_id,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "EmotionPrediction":
        scores = {EmotionLabel(k): float(v) for k, v in data["scores"].items()}
        return cls(label=EmotionLabel(data["label"]), scores=scores, model_id=data["model_id"])


@dataclass(frozen=True)
class ReflectionEntry:
    """The three blockage-reflection answers: stuck / tried / next."""

    blockage: str
    tried: str
    goal: str

    def violations(self) -> list[str]:
        out = []
        if not self.blockage.strip():
            out.append("reflection blockage is empty")
        if not self.goal.strip():
            out.append("reflection goal is empty")
        return out

    def to_json(self) -> dict[str, Any]:
        return {"blockage": self.blockage, "tried": self.tried, "goal": self.goal}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ReflectionEntry":
        return cls(blockage=data["blockage"], tried=data.get("tried", ""), goal=data["goal"])


class StepKind(str, Enum):
    IMMEDIATE = "immediate"
    SHORT_TERM = "short_term"
    LONGER_TERM = "longer_term"


STEP_KIND_ORDER: tuple[StepKind, ...] = (StepKind.IMMEDIATE, StepKind.SHORT_TERM, StepKind.LONGER_TERM)


@dataclass(frozen=True)
class SuggestionStep:
    kind: StepKind
    action: str
    explanation: str

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "action": self.action, "explanation": self.explanation}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "SuggestionStep":
        return cls(kind=StepKind(data["kind"]), action=data["action"], explanation=data["explanation"])


@dataclass(frozen=True)
class ThreeStepSuggestion:
    """Bounded suggestion: immediate action, short-term strategy, longer-term reminder."""

    steps: tuple[SuggestionStep, ...]
    raw_text: str

    def violations(self) -> list[str]:
        out: list[str] = []
        if len(self.steps) != 3:
            out.append(f"suggestion has {len(self.steps)} steps, expected exactly 3")
            return out
        for step, expected_kind in zip(self.steps, STEP_KIND_ORDER):
            if step.kind is not expected_kind:
                out.append(f"step kind {step.kind.value} out of order, expected {expected_kind.value}")
            if not step.action.strip():
                out.append(f"{expected_kind.value} step has empty action")
            if not step.explanation.strip():
                out.append(f"{expected_kind.value} step has empty explanation")
        return out

    def to_json(self) -> dict[str, Any]:
        return {"steps": [s.to_json() for s in self.steps], "raw_text": self.raw_text}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ThreeStepSuggestion":
        steps = tuple(SuggestionStep.from_json(s) for s in data["steps"])
        return cls(steps=steps, raw_text=data.get("raw_text", ""))


@dataclass(frozen=True)
class PromptFields:
    """The six prompt input slots. Empty session_context is legal."""

    detected_emotion: str
    user_confirmed_state: str
    reflection_blockage: str
    reflection_tried: str
    reflection_goal: str
    session_context: str = ""


@dataclass(frozen=True)
class SessionRecord:
    """One reflection episode.

    confirmed_state is always present; the detected cue, reflection, and
    suggestion are optional. ``extras`` carries unknown fields read from
    disk so future schema versions survive a read/rewrite cycle.
    """

    id: str
    timestamp: datetime
    confirmed_state: EmotionLabel
    was_corrected: bool
    detected_emotion: Optional[EmotionPrediction] = None
    reflection: Optional[ReflectionEntry] = None
    suggestion: Optional[ThreeStepSuggestion] = None
    schema_version: int = SCHEMA_VERSION
    extras: Mapping[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "id": self.id,
            "timestamp": format_timestamp(self.timestamp),
            "confirmed_state": self.confirmed_state.value,
            "was_corrected": self.was_corrected,
            "schema_version": self.schema_version,
        }
        if self.detected_emotion is not None:
            data["detected_emotion"] = self.detected_emotion.to_json()
        if self.reflection is not None:
            data["reflection"] = self.reflection.to_json()
        if self.suggestion is not None:
            data["suggestion"] = self.suggestion.to_json()
        for key, value in self.extras.items():
            data.setdefault(key, value)
        return data

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "SessionRecord":
        known = {
            "id", "timestamp", "confirmed_state", "was_corrected",
            "detected_emotion", "reflection", "suggestion", "schema_version",
        }
        extras = {k: v for k, v in data.items() if k not in known}
        detected = data.get("detected_emotion")
        reflection = data.get("reflection")
        suggestion = data.get("suggestion")
        return cls(
            id=data["id"],
            timestamp=parse_timestamp(data["timestamp"]),
            confirmed_state=EmotionLabel(data["confirmed_state"]),
            was_corrected=bool(data["was_corrected"]),
            detected_emotion=EmotionPrediction.from_json(detected) if detected is not None else None,
            reflection=ReflectionEntry.from_json(reflection) if reflection is not None else None,
            suggestion=ThreeStepSuggestion.from_json(suggestion) if suggestion is not None else None,
            schema_version=int(data.get("schema_version", SCHEMA_VERSION)),
            extras=extras,
        )


def format_timestamp(ts: datetime) -> str:
    """RFC 3339 with a Z suffix, second precision."""
    if ts.tzinfo is None:
        raise ValueError("timestamp must be timezone-aware")
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {text!r} is not timezone-aware")
    return ts.astimezone(timezone.utc)


def make_record(
    confirmed_state: EmotionLabel,
    *,
    detected_emotion: Optional[EmotionPrediction] = None,
    reflection: Optional[ReflectionEntry] = None,
    suggestion: Optional[ThreeStepSuggestion] = None,
    timestamp: Optional[datetime] = None,
    record_id: Optional[str] = None,
    extras: Optional[Mapping[str, Any]] = None,
) -> SessionRecord:
    """Build a record with derived fields filled in consistently.

    was_corrected is computed from the detected/confirmed pair; the id and
    timestamp are generated when not supplied.
    """
    ts = (timestamp or utc_now()).astimezone(timezone.utc).replace(microsecond=0)
    was_corrected = detected_emotion is not None and detected_emotion.label is not confirmed_state
    return SessionRecord(
        id=record_id or new_record_id(),
        timestamp=ts,
        confirmed_state=confirmed_state,
        was_corrected=was_corrected,
        detected_emotion=detected_emotion,
        reflection=reflection,
        suggestion=suggestion,
        extras=dict(extras or {}),
    )


def validate_record(record: SessionRecord) -> list[str]:
    """Check every SessionRecord invariant.

    Returns an empty list when the record is valid; otherwise one entry
    per violated invariant. Violations are data, not exceptions.
    """
    out: list[str] = []
    if not record.id:
        out.append("id is empty")
    if record.timestamp.tzinfo is None:
        out.append("timestamp is not timezone-aware UTC")
    elif record.timestamp.utcoffset() != timezone.utc.utcoffset(None):
        out.append("timestamp is not in UTC")
    if record.timestamp.microsecond != 0:
        out.append("timestamp carries sub-second precision")
    if not isinstance(record.confirmed_state, EmotionLabel):
        out.append("confirmed_state is not a known label")
    if record.schema_version < 1:
        out.append("schema_version must be >= 1")

    if record.detected_emotion is not None:
        out.extend(record.detected_emotion.violations())
        expected = record.detected_emotion.label is not record.confirmed_state
        if record.was_corrected != expected:
            out.append("was_corrected inconsistent with detected/confirmed labels")
    elif record.was_corrected:
        out.append("was_corrected inconsistent: no detected emotion present")

    if record.reflection is not None:
        out.extend(record.reflection.violations())
    if record.suggestion is not None:
        if record.reflection is None:
            out.append("suggestion without reflection")
        out.extend(record.suggestion.violations())
    return out
