#!/usr/bin/env python3
"""Classification metrics on a published-style diagnostic subset.

Builds a 500-sample confusion matrix (ground truth limited to disgust,
fear, and surprise over the full 7-way prediction space), expands it back
into pairs, rescans them through the scorer, and prints the formatted
report. Also shows per-class accuracy on a matrix reconstructed from
percentage/support pairs, a handy trick when only rounded numbers survive.
"""

import numpy as np

from mindmirror.domain import CANONICAL_LABELS
from mindmirror.metrics import (
    ConfusionMatrix,
    build_report,
    format_report,
    pairs_from_matrix,
    per_class_accuracy,
    percent_2dp,
    round_half_up,
    score_pairs,
)

# rows: ground-truth disgust / fear / surprise, columns in canonical order
SUBSET_ROWS = {
    "disgust": [10, 117, 1, 6, 2, 2, 0],
    "fear": [0, 0, 125, 1, 1, 2, 14],
    "surprise": [0, 1, 7, 3, 1, 1, 206],
}

# class -> (support, accuracy %) for a full-benchmark style comparison
FULL_BENCH = {
    "angry": (1095, 93.79),
    "disgust": (686, 93.29),
    "fear": (715, 92.17),
    "happy": (1683, 98.34),
    "neutral": (594, 91.92),
    "sad": (900, 92.11),
    "surprise": (1094, 94.88),
}


def main() -> None:
    counts = np.zeros((7, 7), dtype=np.int64)
    order = [l.value for l in CANONICAL_LABELS]
    for name, row in SUBSET_ROWS.items():
        counts[order.index(name)] = row
    matrix = ConfusionMatrix(counts)

    pairs = pairs_from_matrix(matrix)
    rescored = score_pairs(pairs)
    assert np.array_equal(rescored.counts, matrix.counts)
    print(f"expanded {len(pairs)} pairs and rescored them losslessly\n")
    print(format_report(build_report(rescored)))

    print("\n=== per-class accuracy from a reconstructed matrix ===")
    big = np.zeros((7, 7), dtype=np.int64)
    for i, label in enumerate(CANONICAL_LABELS):
        support, pct = FULL_BENCH[label.value]
        correct = int(round_half_up(pct * support / 100.0))
        big[i, i] = correct
        big[i, (i + 1) % 7] = support - correct
    reconstructed = ConfusionMatrix(big)
    accuracy = per_class_accuracy(reconstructed)
    for label in CANONICAL_LABELS:
        support, pct = FULL_BENCH[label.value]
        print(f"  {label.value:<9} {reconstructed.cell(label, label):>5}/{support:<5}"
              f" -> {percent_2dp(accuracy[label])}%  (target {pct:.2f}%)")
    total = reconstructed.trace
    print(f"  reconstructed correct total: {total} of {reconstructed.total}")


if __name__ == "__main__":
    main()
