"""Mini-batch training loop with validation tracking and early stopping."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from src.errors import IncompatibleDataError, TrainingDivergedError
from src.features.sequences import SequenceSample, batch
from src.model.ecnet import EcNetModel, backward, forward, predict
from src.training.config import TrainConfig
from src.training.losses import cross_entropy
from src.training.metrics import ConfusionMatrix, confusion
from src.training.optimizers import OptimizerState, optimizer_step

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["epoch", "train_loss", "val_accuracy"]


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_accuracy: float | None


def accuracy(m: EcNetModel, samples: list[SequenceSample]) -> float:
    preds, _ = predict(m, samples)
    targets = np.array([s.target for s in samples], dtype=np.int64)
    return float(np.mean(preds == targets))


def train(
    m: EcNetModel,
    train_samples: list[SequenceSample],
    val_samples: list[SequenceSample],
    config: TrainConfig,
) -> tuple[EcNetModel, list[EpochRecord]]:
    """Fit m in place with mean cross-entropy.

    Epoch e visits the training samples in the order given by seed
    config.seed + e. With early_stop_patience set and a validation set
    present, training stops after that many epochs without a validation
    accuracy improvement and the best parameters are restored.

    Args:
        m: Model to train (parameters are updated in place)
        train_samples: Non-empty list of training windows
        val_samples: Validation windows (may be empty)
        config: Optimizer and loop settings

    Returns:
        (m, one EpochRecord per completed epoch)

    Raises:
        IncompatibleDataError: If the training set is empty
        TrainingDivergedError: If a batch loss is not finite
    """
    if not train_samples:
        raise IncompatibleDataError("training set is empty")

    state = OptimizerState()
    history: list[EpochRecord] = []
    best_accuracy = -1.0
    best_params = None
    stale = 0

    for epoch in range(1, config.epochs + 1):
        losses = []
        weights = []
        batches = batch(train_samples, config.batch_size, seed=config.seed + epoch, shuffle=True)
        for index, b in enumerate(batches):
            probs, cache = forward(m, b)
            loss, _ = cross_entropy(probs, b.targets)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, index, loss)
            grads = backward(m, cache, targets=b.targets)
            optimizer_step(m.params, grads, state, config)
            losses.append(loss)
            weights.append(len(b))

        train_loss = float(np.average(losses, weights=weights))
        val_accuracy = accuracy(m, val_samples) if val_samples else None
        history.append(EpochRecord(epoch=epoch, train_loss=train_loss, val_accuracy=val_accuracy))
        logger.info(
            "epoch %d/%d train_loss=%.6f val_accuracy=%s",
            epoch, config.epochs, train_loss, "n/a" if val_accuracy is None else f"{val_accuracy:.4f}",
        )

        if config.early_stop_patience is None or val_accuracy is None:
            continue
        if val_accuracy > best_accuracy:
            best_accuracy = val_accuracy
            best_params = m.copy_params()
            stale = 0
        else:
            stale += 1
            if stale >= config.early_stop_patience:
                logger.info("early stop at epoch %d, best val_accuracy=%.4f", epoch, best_accuracy)
                break

    if best_params is not None:
        m.load_params(best_params)
    return m, history


def history_frame(history: list[EpochRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [(r.epoch, r.train_loss, r.val_accuracy) for r in history], columns=HISTORY_COLUMNS
    )


def write_history(history: list[EpochRecord], path: str | Path) -> None:
    history_frame(history).to_csv(path, index=False, lineterminator="\n", float_format="%.10g")


def evaluate_confusion(
    m: EcNetModel,
    samples: list[SequenceSample],
    workers: int = 1,
    shard_size: int = 1024,
) -> tuple[np.ndarray, np.ndarray, ConfusionMatrix]:
    """Predict every sample, sharding across threads, and tally a confusion matrix.

    Returns:
        (predicted ids, true ids, confusion over the model's classes)
    """
    shards = [samples[start:start + shard_size] for start in range(0, len(samples), shard_size)]
    if workers > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(lambda shard: predict(m, shard)[0], shards))
    else:
        results = [predict(m, shard)[0] for shard in shards]
    preds = np.concatenate(results) if results else np.zeros(0, dtype=np.int64)
    truth = np.array([s.target for s in samples], dtype=np.int64)
    return preds, truth, confusion(preds, truth, m.config.n_classes)
