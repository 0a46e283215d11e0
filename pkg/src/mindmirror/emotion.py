"""Camera-frame decoding, preprocessing, and pluggable expression classification.

The pipeline is base64 text -> RGB pixels -> normalized 224x224x3 tensor
-> 7-class probability vector. Everything runs in memory: no frame is ever
written to disk, which trivially satisfies the temp-hygiene policy for
camera data.

Backends are pluggable. The deterministic stub keys a configured score
table by a cryptographic fingerprint of the tensor bytes; the TorchScript
backend loads a local model file. In both cases the class-index mapping
and normalization constants come from configuration, never inferred from
the checkpoint.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Protocol, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .domain import CANONICAL_LABELS, EmotionLabel, EmotionPrediction, argmax_label

TENSOR_SIDE = 224


class EmotionError(Exception):
    pass


class EmptyPayload(EmotionError):
    pass


class MalformedBase64(EmotionError):
    pass


class UnsupportedFormat(EmotionError):
    pass


class DegenerateImage(EmotionError):
    pass


class BackendUnavailable(EmotionError):
    pass


class InferenceFailure(EmotionError):
    pass


@dataclass(frozen=True)
class Normalization:
    """Per-channel constants applied after scaling pixels to [0, 1].

    The values are checkpoint-specific and always come from backend
    configuration.
    """

    mean: tuple[float, float, float] = (0.0, 0.0, 0.0)
    std: tuple[float, float, float] = (1.0, 1.0, 1.0)


IDENTITY_NORMALIZATION = Normalization()


def decode_image(payload: str) -> np.ndarray:
    """Decode base64 (or data-URL) text into an RGB uint8 array (H, W, 3)."""
    if payload is None or not payload.strip():
        raise EmptyPayload("image payload is empty")
    text = payload.strip()
    if text.startswith("data:"):
        _, _, text = text.partition(",")
        if not text:
            raise EmptyPayload("data URL carries no payload")
    try:
        raw = base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise MalformedBase64(f"payload is not valid base64: {exc}") from exc
    if not raw:
        raise EmptyPayload("decoded payload is empty")
    try:
        with Image.open(io.BytesIO(raw)) as img:
            rgb = img.convert("RGB")
    except (UnidentifiedImageError, OSError) as exc:
        raise UnsupportedFormat(f"decoded bytes are not a recognizable image: {exc}") from exc
    return np.asarray(rgb, dtype=np.uint8)


def preprocess(image: np.ndarray, normalization: Normalization = IDENTITY_NORMALIZATION) -> np.ndarray:
    """Bilinear-resize to 224x224, scale to [0, 1], apply per-channel mean/std."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise DegenerateImage(f"expected an RGB array, got shape {image.shape}")
    height, width = image.shape[:2]
    if height == 0 or width == 0:
        raise DegenerateImage("zero-area image")
    resized = Image.fromarray(image, mode="RGB").resize(
        (TENSOR_SIDE, TENSOR_SIDE), Image.Resampling.BILINEAR
    )
    tensor = np.asarray(resized, dtype=np.float32) / 255.0
    mean = np.asarray(normalization.mean, dtype=np.float32)
    std = np.asarray(normalization.std, dtype=np.float32)
    return (tensor - mean) / std


class ClassifierBackend(Protocol):
    model_id: str
    normalization: Normalization

    def ready(self) -> bool: ...

    def predict_scores(self, tensor: np.ndarray) -> dict[EmotionLabel, float]: ...


def classify(tensor: np.ndarray, backend: ClassifierBackend) -> EmotionPrediction:
    """Run the backend on a preprocessed tensor and wrap the result.

    The returned prediction always satisfies the score-vector invariants;
    a backend emitting a broken vector surfaces as InferenceFailure.
    """
    if tensor.shape != (TENSOR_SIDE, TENSOR_SIDE, 3):
        raise DegenerateImage(f"tensor must be {TENSOR_SIDE}x{TENSOR_SIDE}x3, got {tensor.shape}")
    scores = backend.predict_scores(tensor)
    prediction = EmotionPrediction(label=argmax_label(scores), scores=scores,
                                   model_id=backend.model_id)
    violations = prediction.violations()
    if violations:
        raise InferenceFailure("backend returned an invalid score vector: " + "; ".join(violations))
    return prediction


def analyze_base64(payload: str, backend: ClassifierBackend) -> EmotionPrediction:
    """decode -> preprocess -> classify, entirely in memory."""
    image = decode_image(payload)
    tensor = preprocess(image, backend.normalization)
    return classify(tensor, backend)


def _normalize_table(scores: Mapping) -> dict[EmotionLabel, float]:
    values = {EmotionLabel(k): float(v) for k, v in scores.items()}
    for label in CANONICAL_LABELS:
        values.setdefault(label, 0.0)
    total = sum(values.values())
    if total <= 0:
        raise ValueError("score table must have positive mass")
    return {label: values[label] / total for label in CANONICAL_LABELS}


class StubClassifier:
    """Deterministic test backend: score tables keyed by tensor fingerprint.

    Tables are normalized to probability vectors at construction, so any
    positive table is legal. Identical input bytes always yield identical
    scores (the fingerprint is a SHA-256 of the tensor bytes).
    """

    def __init__(
        self,
        default_scores: Optional[Mapping] = None,
        table: Optional[Mapping[str, Mapping]] = None,
        model_id: str = "stub",
    ):
        uniform = {label: 1.0 for label in CANONICAL_LABELS}
        self.default_scores = _normalize_table(default_scores or uniform)
        self.table = {key: _normalize_table(scores) for key, scores in (table or {}).items()}
        self.model_id = model_id
        self.normalization = IDENTITY_NORMALIZATION

    @staticmethod
    def fingerprint(tensor: np.ndarray) -> str:
        return hashlib.sha256(np.ascontiguousarray(tensor, dtype=np.float32).tobytes()).hexdigest()

    def ready(self) -> bool:
        return True

    def predict_scores(self, tensor: np.ndarray) -> dict[EmotionLabel, float]:
        return dict(self.table.get(self.fingerprint(tensor), self.default_scores))


class TorchScriptClassifier:
    """Backend over a local TorchScript model file.

    The model maps a (1, 3, 224, 224) float tensor to 7 logits; softmax
    happens here. ``class_order`` states which label each output index
    means and must list all 7 labels explicitly.
    """

    def __init__(
        self,
        model_path: Path | str,
        class_order: Sequence[EmotionLabel],
        normalization: Normalization = IDENTITY_NORMALIZATION,
        model_id: Optional[str] = None,
    ):
        order = tuple(class_order)
        if sorted(order, key=lambda l: l.value) != sorted(CANONICAL_LABELS, key=lambda l: l.value):
            raise ValueError("class_order must be a permutation of the 7 labels")
        self.model_path = Path(model_path)
        self.class_order = order
        self.normalization = normalization
        self.model_id = model_id or self.model_path.name
        self._model = None

    def _ensure_loaded(self):
        if self._model is not None:
            return self._model
        try:
            import torch
        except ImportError as exc:
            raise BackendUnavailable("torch runtime is not installed") from exc
        if not self.model_path.exists():
            raise BackendUnavailable(f"model file not found: {self.model_path.name}")
        try:
            self._model = torch.jit.load(str(self.model_path), map_location="cpu")
            self._model.eval()
        except Exception as exc:
            raise BackendUnavailable(f"model file failed to load: {exc}") from exc
        return self._model

    def ready(self) -> bool:
        try:
            self._ensure_loaded()
            return True
        except BackendUnavailable:
            return False

    def predict_scores(self, tensor: np.ndarray) -> dict[EmotionLabel, float]:
        model = self._ensure_loaded()
        import torch

        try:
            with torch.no_grad():
                batch = torch.from_numpy(np.ascontiguousarray(tensor, dtype=np.float32))
                batch = batch.permute(2, 0, 1).unsqueeze(0)
                logits = model(batch)
                probs = torch.softmax(logits.reshape(-1).double(), dim=0).numpy()
        except Exception as exc:
            raise InferenceFailure(f"inference failed: {exc}") from exc
        if probs.shape != (len(self.class_order),):
            raise InferenceFailure(f"model produced {probs.shape} outputs, expected 7")
        return {label: float(probs[i]) for i, label in enumerate(self.class_order)}


def load_backend(config: Mapping | Path | str) -> ClassifierBackend:
    """Build a backend from a config mapping or a JSON config file."""
    if isinstance(config, (str, Path)):
        config = json.loads(Path(config).read_text(encoding="utf-8"))
    kind = config.get("kind", "stub")
    if kind == "stub":
        return StubClassifier(
            default_scores=config.get("default_scores"),
            table=config.get("table"),
            model_id=config.get("model_id", "stub"),
        )
    if kind == "torchscript":
        normalization = Normalization(
            mean=tuple(config.get("mean", (0.0, 0.0, 0.0))),
            std=tuple(config.get("std", (1.0, 1.0, 1.0))),
        )
        return TorchScriptClassifier(
            model_path=config["model_path"],
            class_order=[EmotionLabel(c) for c in config["class_order"]],
            normalization=normalization,
            model_id=config.get("model_id"),
        )
    raise ValueError(f"unknown backend kind: {kind!r}")
