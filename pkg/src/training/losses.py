"""Cross-entropy on softmax outputs."""

import numpy as np

from src.errors import ShapeError
from src.nn.core import Matrix

PROB_FLOOR = 1e-12


def cross_entropy(probs: Matrix, targets: np.ndarray) -> tuple[float, Matrix]:
    """Mean negative log-likelihood and its fused gradient with respect to logits.

    Args:
        probs: B x C probability rows
        targets: Length-B class ids

    Returns:
        (loss, d_logits) where loss = -mean log max(p[target], 1e-12) and
        d_logits = (p - onehot) / B

    Raises:
        ValueError: If a target id is outside [0, C)
    """
    probs = np.asarray(probs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.int64)
    if probs.ndim != 2 or targets.shape != (probs.shape[0],):
        raise ShapeError(f"probabilities {probs.shape} and targets {targets.shape} disagree")
    n_classes = probs.shape[1]
    bad = targets[(targets < 0) | (targets >= n_classes)]
    if bad.size:
        raise ValueError(f"target id {int(bad[0])} outside [0, {n_classes})")

    rows = np.arange(len(targets))
    loss = float(-np.mean(np.log(np.maximum(probs[rows, targets], PROB_FLOOR))))
    d_logits = probs.copy()
    d_logits[rows, targets] -= 1.0
    d_logits /= len(targets)
    return loss, d_logits
