"""Classification scoring: confusion matrices, P/R/F1, macro averages.

Conventions: matrices are 7x7 integer counts indexed (true, predicted) in
canonical label order; "per-class accuracy" means recall (diagonal over
row support); zero-denominator metrics come back 0 with a logged warning
instead of NaN; percentages render half-up to 2 decimal places.
"""

from __future__ import annotations

import base64
import csv
import logging
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .domain import CANONICAL_LABELS, EmotionLabel

logger = logging.getLogger(__name__)

N_CLASSES = len(CANONICAL_LABELS)
_INDEX = {label: i for i, label in enumerate(CANONICAL_LABELS)}


class MetricsError(Exception):
    pass


class EmptyManifest(MetricsError):
    pass


def round_half_up(value: float, places: int = 0) -> Decimal:
    quantum = Decimal(1).scaleb(-places)
    return Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)


def percent_2dp(fraction: float) -> Decimal:
    """Fraction -> percentage with the tables' half-up 2-dp rounding."""
    return round_half_up(fraction * 100.0, places=2)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts indexed (true, predicted) in canonical order."""

    counts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.counts, dtype=np.int64)
        if arr.shape != (N_CLASSES, N_CLASSES):
            raise ValueError(f"confusion matrix must be {N_CLASSES}x{N_CLASSES}")
        if (arr < 0).any():
            raise ValueError("confusion matrix counts must be non-negative")
        object.__setattr__(self, "counts", arr)

    def cell(self, true: EmotionLabel, predicted: EmotionLabel) -> int:
        return int(self.counts[_INDEX[true], _INDEX[predicted]])

    def support(self, label: EmotionLabel) -> int:
        return int(self.counts[_INDEX[label]].sum())

    def predicted_total(self, label: EmotionLabel) -> int:
        return int(self.counts[:, _INDEX[label]].sum())

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))

    def present_classes(self) -> list[EmotionLabel]:
        """Labels that occur as ground truth (row support > 0)."""
        return [label for label in CANONICAL_LABELS if self.support(label) > 0]

    def to_json(self) -> dict[str, Any]:
        return {
            "labels": [label.value for label in CANONICAL_LABELS],
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_counts(cls, rows: Sequence[Sequence[int]]) -> "ConfusionMatrix":
        return cls(np.asarray(rows, dtype=np.int64))


def score_pairs(pairs: Iterable[tuple[EmotionLabel, EmotionLabel]]) -> ConfusionMatrix:
    """Tally (true, predicted) pairs into a confusion matrix."""
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for true, predicted in pairs:
        counts[_INDEX[true], _INDEX[predicted]] += 1
    return ConfusionMatrix(counts)


def pairs_from_matrix(matrix: ConfusionMatrix) -> list[tuple[EmotionLabel, EmotionLabel]]:
    """Expand a matrix back into one pair per counted sample."""
    out = []
    for true in CANONICAL_LABELS:
        for predicted in CANONICAL_LABELS:
            out.extend([(true, predicted)] * matrix.cell(true, predicted))
    return out


def overall_accuracy(matrix: ConfusionMatrix) -> float:
    """Diagonal mass over total; 0 with a warning for an empty matrix."""
    if matrix.total == 0:
        logger.warning("overall accuracy of an empty matrix reported as 0")
        return 0.0
    return matrix.trace / matrix.total


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int

    def to_json(self) -> dict[str, Any]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


def _safe_ratio(numerator: int, denominator: int, what: str) -> float:
    if denominator == 0:
        logger.warning("%s has a zero denominator; reporting 0", what)
        return 0.0
    return numerator / denominator


def class_metrics(matrix: ConfusionMatrix, label: EmotionLabel) -> ClassMetrics:
    hit = matrix.cell(label, label)
    precision = _safe_ratio(hit, matrix.predicted_total(label), f"precision({label.value})")
    recall = _safe_ratio(hit, matrix.support(label), f"recall({label.value})")
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ClassMetrics(precision=precision, recall=recall, f1=f1, support=matrix.support(label))


def macro_average(matrix: ConfusionMatrix) -> ClassMetrics:
    """Unweighted mean over ground-truth-present classes; support = total pairs."""
    present = matrix.present_classes()
    if not present:
        logger.warning("macro average over an empty matrix reported as 0")
        return ClassMetrics(0.0, 0.0, 0.0, 0)
    per_class = [class_metrics(matrix, label) for label in present]
    n = len(per_class)
    return ClassMetrics(
        precision=sum(m.precision for m in per_class) / n,
        recall=sum(m.recall for m in per_class) / n,
        f1=sum(m.f1 for m in per_class) / n,
        support=matrix.total,
    )


def per_class_accuracy(matrix: ConfusionMatrix) -> dict[EmotionLabel, Optional[float]]:
    """Recall per class; None (rendered "n/a") for classes with no ground truth."""
    out: dict[EmotionLabel, Optional[float]] = {}
    for label in CANONICAL_LABELS:
        support = matrix.support(label)
        out[label] = matrix.cell(label, label) / support if support > 0 else None
    return out


# --- manifests ---------------------------------------------------------------

SCORING_HEADER = ["true_label", "pred_label"]
INFERENCE_HEADER = ["path", "true_label"]


@dataclass(frozen=True)
class Manifest:
    """Labeled evaluation input: either scored pairs or image paths + truth."""

    mode: str  # "scoring" | "inference"
    pairs: tuple[tuple[EmotionLabel, EmotionLabel], ...] = ()
    items: tuple[tuple[Path, EmotionLabel], ...] = ()


def load_manifest(path: Path | str) -> Manifest:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyManifest(f"{path.name} has no header row") from None
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise EmptyManifest(f"{path.name} lists no entries")
    if header == SCORING_HEADER:
        pairs = tuple((EmotionLabel(t.strip()), EmotionLabel(p.strip())) for t, p in rows)
        return Manifest(mode="scoring", pairs=pairs)
    if header == INFERENCE_HEADER:
        items = []
        for rel, true in rows:
            image = (path.parent / rel.strip()).resolve()
            if not image.exists():
                raise MetricsError(f"manifest references a missing image: {rel.strip()}")
            items.append((image, EmotionLabel(true.strip())))
        return Manifest(mode="inference", items=tuple(items))
    raise MetricsError(f"unrecognized manifest header: {header}")


# --- full evaluation report ---------------------------------------------------


@dataclass(frozen=True)
class EvalReport:
    matrix: ConfusionMatrix
    overall: float
    per_class: dict[EmotionLabel, Optional[float]]
    metrics: dict[EmotionLabel, ClassMetrics]
    macro: ClassMetrics

    def to_json(self) -> dict[str, Any]:
        return {
            "total": self.matrix.total,
            "correct": self.matrix.trace,
            "overall_accuracy": self.overall,
            "overall_accuracy_pct": str(percent_2dp(self.overall)),
            "confusion_matrix": self.matrix.to_json(),
            "per_class_accuracy": {
                label.value: value for label, value in self.per_class.items()
            },
            "class_metrics": {label.value: m.to_json() for label, m in self.metrics.items()},
            "macro": self.macro.to_json(),
        }


def build_report(matrix: ConfusionMatrix) -> EvalReport:
    # P/R/F1 rows cover ground-truth-present classes only, like the tables
    return EvalReport(
        matrix=matrix,
        overall=overall_accuracy(matrix),
        per_class=per_class_accuracy(matrix),
        metrics={label: class_metrics(matrix, label) for label in matrix.present_classes()},
        macro=macro_average(matrix),
    )


def run_inference_eval(manifest: Manifest, backend=None) -> EvalReport:
    """Score a manifest. Inference mode pushes every image through the same
    decode/preprocess/classify path the service uses."""
    if manifest.mode == "scoring":
        if not manifest.pairs:
            raise EmptyManifest("scoring manifest lists no pairs")
        return build_report(score_pairs(manifest.pairs))
    if backend is None:
        raise MetricsError("inference mode needs a classifier backend")
    if not manifest.items:
        raise EmptyManifest("inference manifest lists no images")
    from .emotion import analyze_base64

    pairs = []
    for image_path, true in manifest.items:
        payload = base64.b64encode(image_path.read_bytes()).decode("ascii")
        prediction = analyze_base64(payload, backend)
        pairs.append((true, prediction.label))
    return build_report(score_pairs(pairs))


# --- text tables --------------------------------------------------------------


def _fmt_pct(fraction: Optional[float]) -> str:
    return "n/a" if fraction is None else f"{percent_2dp(fraction)}%"


def format_overall_table(report: EvalReport) -> str:
    lines = [
        f"{'Correct':>10} {'Total':>10} {'Accuracy':>10}",
        f"{report.matrix.trace:>10,} {report.matrix.total:>10,} {_fmt_pct(report.overall):>10}",
    ]
    return "\n".join(lines)


def format_prf_table(report: EvalReport) -> str:
    lines = [f"{'Emotion':<12} {'Precision':>10} {'Recall':>10} {'F1-score':>10} {'Support':>8}"]
    for label in report.matrix.present_classes():
        m = report.metrics[label]
        lines.append(
            f"{label.value:<12} {m.precision:>10.4f} {m.recall:>10.4f} {m.f1:>10.4f} {m.support:>8}"
        )
    macro = report.macro
    lines.append(
        f"{'Macro avg.':<12} {macro.precision:>10.4f} {macro.recall:>10.4f} "
        f"{macro.f1:>10.4f} {macro.support:>8}"
    )
    return "\n".join(lines)


def format_confusion_table(report: EvalReport) -> str:
    header = f"{'True/Pred.':<12}" + "".join(f"{l.value:>10}" for l in CANONICAL_LABELS)
    lines = [header]
    for true in report.matrix.present_classes():
        row = f"{true.value:<12}" + "".join(
            f"{report.matrix.cell(true, p):>10}" for p in CANONICAL_LABELS
        )
        lines.append(row)
    return "\n".join(lines)


def format_per_class_table(report: EvalReport) -> str:
    lines = [f"{'Emotion':<12} {'Total':>8} {'Accuracy':>10}"]
    for label in CANONICAL_LABELS:
        lines.append(
            f"{label.value:<12} {report.matrix.support(label):>8,} "
            f"{_fmt_pct(report.per_class[label]):>10}"
        )
    lines.append(f"{'Overall':<12} {report.matrix.total:>8,} {_fmt_pct(report.overall):>10}")
    return "\n".join(lines)


def format_report(report: EvalReport) -> str:
    return "\n\n".join(
        [
            "Overall accuracy\n" + format_overall_table(report),
            "Per-class precision/recall/F1\n" + format_prf_table(report),
            "Confusion matrix\n" + format_confusion_table(report),
            "Per-class accuracy\n" + format_per_class_table(report),
        ]
    )
