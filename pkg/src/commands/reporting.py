"""Evaluation reports written by train and eval."""

import logging
from pathlib import Path
from typing import Any

from src.features.sequences import SequenceSample
from src.flows.labels import BENIGN_NAME, LabelVocab
from src.model.ecnet import EcNetModel
from src.training.metrics import (
    EvalReport,
    binary_collapse,
    confusion,
    majority_baseline,
    metrics_from_confusion,
)
from src.training.trainer import evaluate_confusion

logger = logging.getLogger(__name__)

BINARY_NAMES = [BENIGN_NAME, "Malicious"]


def build_report(
    m: EcNetModel,
    samples: list[SequenceSample],
    vocab: LabelVocab,
    binary: bool,
    config: dict[str, Any],
    seed: int,
    generated_at: str,
    workers: int = 1,
) -> EvalReport:
    """Evaluate m on samples and assemble a report with run metadata.

    In binary mode truth and predictions both pass through binary_collapse
    before the confusion matrix is built.

    Raises:
        LabelVocabError: Binary mode without a benign class
        ValueError: If samples is empty
    """
    preds, truth, cm = evaluate_confusion(m, samples, workers=workers)
    names = list(vocab.names)
    if binary:
        preds = binary_collapse(vocab, preds)
        truth = binary_collapse(vocab, truth)
        names = list(BINARY_NAMES)
        cm = confusion(preds, truth, 2)

    report = metrics_from_confusion(cm, names)
    majority = majority_baseline(truth, len(names), names)
    return report.model_copy(update={
        "mode": "binary" if binary else "multiclass",
        "majority_accuracy": majority.accuracy,
        "majority_macro_f1": majority.macro.f1,
        "seed": seed,
        "generated_at": generated_at,
        "config": config,
    })


def write_report(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("wrote %s report %s (accuracy=%.4f, macro F1=%.4f)", report.mode, path, report.accuracy, report.macro.f1)


def format_report(report: EvalReport) -> str:
    """Human-readable per-class table for stdout."""
    lines = [f"{'class':<32} {'precision':>9} {'recall':>9} {'f1':>9} {'support':>8}"]
    for row in report.per_class:
        lines.append(f"{row.name:<32} {row.precision:>9.4f} {row.recall:>9.4f} {row.f1:>9.4f} {row.support:>8d}")
    lines.append(f"{'macro':<32} {report.macro.precision:>9.4f} {report.macro.recall:>9.4f} {report.macro.f1:>9.4f}")
    lines.append(
        f"{'weighted':<32} {report.weighted.precision:>9.4f} {report.weighted.recall:>9.4f} {report.weighted.f1:>9.4f}"
    )
    lines.append(f"accuracy {report.accuracy:.4f} (majority baseline {report.majority_accuracy:.4f})")
    for flag in report.flags:
        lines.append(f"note: {flag}")
    return "\n".join(lines)
