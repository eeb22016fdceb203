"""Training loop, optimizers, loss and evaluation metrics."""

from .config import OptimizerName, TrainConfig
from .losses import cross_entropy
from .optimizers import OptimizerState, clip_by_global_norm, global_norm, optimizer_step
from .metrics import (
    ClassMetrics,
    ConfusionMatrix,
    EvalReport,
    binary_collapse,
    confusion,
    majority_baseline,
    metrics_from_confusion,
)
from .trainer import EpochRecord, evaluate_confusion, train, write_history

__all__ = [
    "OptimizerName",
    "TrainConfig",
    "cross_entropy",
    "OptimizerState",
    "clip_by_global_norm",
    "global_norm",
    "optimizer_step",
    "ClassMetrics",
    "ConfusionMatrix",
    "EvalReport",
    "binary_collapse",
    "confusion",
    "majority_baseline",
    "metrics_from_confusion",
    "EpochRecord",
    "evaluate_confusion",
    "train",
    "write_history",
]
