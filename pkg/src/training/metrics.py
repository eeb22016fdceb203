"""Confusion matrices and the accuracy / precision / recall / F1 report.

Per class c (one-vs-rest):
    TP = cm[c, c]    FP = column sum - TP    FN = row sum - TP
    TN = total - TP - FP - FN
    precision = TP / (TP + FP)    recall = TP / (TP + FN)
    F1 = 2 * precision * recall / (precision + recall)

Accuracy is trace / total. A zero denominator yields 0 and a flag. Macro
averages are unweighted means over classes that occur in the truth; weighted
averages use support as weights.
"""

import numpy as np
from pydantic import BaseModel, Field

from src.errors import ShapeError
from src.flows.labels import LabelVocab


class ConfusionMatrix(BaseModel):
    """counts[t][p]: samples of true class t predicted as p."""

    counts: list[list[int]]

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    @property
    def total(self) -> int:
        return int(self.array.sum())


class ClassMetrics(BaseModel):
    name: str
    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    f1: float = Field(..., ge=0, le=1)
    support: int
    tp: int
    fp: int
    fn: int
    tn: int
    precision_undefined: bool = False
    recall_undefined: bool = False


class AveragedMetrics(BaseModel):
    precision: float
    recall: float
    f1: float


class EvalReport(BaseModel):
    """Evaluation result; run metadata fields are filled in by the CLI."""

    class_names: list[str]
    confusion: ConfusionMatrix
    per_class: list[ClassMetrics]
    accuracy: float
    macro: AveragedMetrics
    weighted: AveragedMetrics
    flags: list[str] = Field(default_factory=list)
    mode: str = "multiclass"
    majority_accuracy: float | None = None
    majority_macro_f1: float | None = None
    seed: int | None = None
    generated_at: str | None = None
    config: dict | None = None


def confusion(preds, truth, n_classes: int) -> ConfusionMatrix:
    """Tally (truth, prediction) pairs.

    Raises:
        ShapeError: If the sequences differ in length
        ValueError: If an id is outside [0, n_classes)
    """
    preds = np.asarray(preds, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if preds.shape != truth.shape:
        raise ShapeError(f"{preds.shape[0]} predictions vs {truth.shape[0]} labels")
    for name, ids in (("prediction", preds), ("label", truth)):
        bad = ids[(ids < 0) | (ids >= n_classes)]
        if bad.size:
            raise ValueError(f"{name} id {int(bad[0])} outside [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (truth, preds), 1)
    return ConfusionMatrix(counts=counts.tolist())


def _ratio(num: int, den: int) -> tuple[float, bool]:
    if den == 0:
        return 0.0, True
    return num / den, False


def metrics_from_confusion(cm: ConfusionMatrix, class_names: list[str] | None = None) -> EvalReport:
    """Compute per-class, macro and weighted metrics from a confusion matrix.

    Raises:
        ValueError: If the matrix is empty or has zero total
    """
    counts = cm.array
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or counts.shape[0] == 0:
        raise ValueError(f"confusion matrix must be square and non-empty, got {counts.shape}")
    total = int(counts.sum())
    if total == 0:
        raise ValueError("confusion matrix has zero total")
    n = counts.shape[0]
    names = class_names or [str(c) for c in range(n)]

    per_class = []
    flags = []
    for c in range(n):
        tp = int(counts[c, c])
        fp = int(counts[:, c].sum()) - tp
        fn = int(counts[c, :].sum()) - tp
        tn = total - tp - fp - fn
        precision, p_undef = _ratio(tp, tp + fp)
        recall, r_undef = _ratio(tp, tp + fn)
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        if p_undef:
            flags.append(f"precision undefined for {names[c]} (never predicted)")
        if r_undef:
            flags.append(f"recall undefined for {names[c]} (no true samples)")
        per_class.append(ClassMetrics(
            name=names[c], precision=precision, recall=recall, f1=f1, support=tp + fn,
            tp=tp, fp=fp, fn=fn, tn=tn, precision_undefined=p_undef, recall_undefined=r_undef,
        ))

    present = [m for m in per_class if m.support > 0]
    macro = AveragedMetrics(
        precision=float(np.mean([m.precision for m in present])),
        recall=float(np.mean([m.recall for m in present])),
        f1=float(np.mean([m.f1 for m in present])),
    )
    weights = np.array([m.support for m in per_class], dtype=np.float64) / total
    weighted = AveragedMetrics(
        precision=float(np.dot(weights, [m.precision for m in per_class])),
        recall=float(np.dot(weights, [m.recall for m in per_class])),
        f1=float(np.dot(weights, [m.f1 for m in per_class])),
    )
    return EvalReport(
        class_names=names,
        confusion=cm,
        per_class=per_class,
        accuracy=float(np.trace(counts)) / total,
        macro=macro,
        weighted=weighted,
        flags=flags,
    )


def binary_collapse(vocab: LabelVocab, ids) -> np.ndarray:
    """Map the benign class to 0 and every other class to 1.

    Raises:
        LabelVocabError: If the vocabulary has no benign class
    """
    benign = vocab.require_benign()
    ids = np.asarray(ids, dtype=np.int64)
    return (ids != benign).astype(np.int64)


def majority_baseline(truth, n_classes: int, class_names: list[str] | None = None) -> EvalReport:
    """Report for a predictor that always answers the most frequent true class."""
    truth = np.asarray(truth, dtype=np.int64)
    majority = int(np.argmax(np.bincount(truth, minlength=n_classes)))
    preds = np.full_like(truth, majority)
    return metrics_from_confusion(confusion(preds, truth, n_classes), class_names)
