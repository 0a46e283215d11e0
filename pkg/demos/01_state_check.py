#!/usr/bin/env python3
"""State check walkthrough: frame -> tensor -> editable prediction.

A camera frame arrives as base64 text, is decoded and resized to the
model's 224x224x3 input, and a pluggable backend turns it into a 7-class
probability vector. The predicted label is only a default: the user
confirms or corrects it before anything is stored.
"""

import base64
import io

from PIL import Image

from mindmirror.domain import CANONICAL_LABELS, EmotionLabel, make_record, validate_record
from mindmirror.emotion import StubClassifier, analyze_base64


def fake_camera_frame() -> str:
    """A synthetic 'webcam frame' (a flat-colored PNG) as base64 text."""
    buf = io.BytesIO()
    Image.new("RGB", (640, 480), (90, 120, 200)).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def main() -> None:
    # A deterministic backend stands in for the real model file here; swap in
    # a TorchScript config (see README) for actual inference.
    backend = StubClassifier(
        default_scores={l: (0.55 if l is EmotionLabel.SAD else 0.075) for l in CANONICAL_LABELS},
        model_id="demo-stub",
    )

    payload = fake_camera_frame()
    prediction = analyze_base64(payload, backend)

    print("Model cue (editable default):")
    print(f"  label    : {prediction.label.value}")
    for label in CANONICAL_LABELS:
        print(f"  {label.value:<9}: {prediction.scores[label]:.3f}")

    # The user disagrees and corrects the state before saving.
    confirmed = EmotionLabel.NEUTRAL
    record = make_record(confirmed, detected_emotion=prediction)
    print(f"\nUser confirms: {confirmed.value}")
    print(f"was_corrected: {record.was_corrected}  (detected {prediction.label.value})")
    print(f"record valid : {validate_record(record) == []}")
    print("\nNothing was written to disk; frames are processed in memory only.")


if __name__ == "__main__":
    main()
