"""Local-first state-reflection workstation.

Core pieces: a 7-class expression vocabulary with editable predictions,
a three-question blockage reflection flow feeding a local LLM, day-sharded
local session records with review reports, an optional voice path, an HTTP
service binding it all, plus an evaluation harness for classification
metrics and endpoint reliability trials.
"""

from .domain import (
    CANONICAL_LABELS,
    EmotionLabel,
    EmotionPrediction,
    PromptFields,
    ReflectionEntry,
    SessionRecord,
    StepKind,
    SuggestionStep,
    ThreeStepSuggestion,
    make_record,
    validate_record,
)

__version__ = "0.1.0"

__all__ = [
    "CANONICAL_LABELS",
    "EmotionLabel",
    "EmotionPrediction",
    "PromptFields",
    "ReflectionEntry",
    "SessionRecord",
    "StepKind",
    "SuggestionStep",
    "ThreeStepSuggestion",
    "make_record",
    "validate_record",
    "__version__",
]
