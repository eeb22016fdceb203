"""Sliding-window sequence samples and mini-batches."""

import logging
from dataclasses import dataclass

import numpy as np

from src.errors import ShapeError
from src.features.encoding import encode_records
from src.features.schema import FeatureSchema
from src.flows.labels import LabelVocab
from src.flows.records import FlowRecord
from src.nn.core import Matrix, make_rng

logger = logging.getLogger(__name__)


@dataclass
class SequenceSample:
    """One window: W x D_num numeric rows, W x D_cat categorical rows, target class."""

    numeric: Matrix
    categorical: Matrix
    target: int

    @property
    def window(self) -> int:
        return self.numeric.shape[0]


@dataclass
class SequenceBatch:
    """B samples stacked as B x W x D arrays."""

    numeric: Matrix
    categorical: Matrix
    targets: np.ndarray

    def __len__(self) -> int:
        return len(self.targets)

    @classmethod
    def stack(cls, samples: list[SequenceSample]) -> "SequenceBatch":
        windows = {s.window for s in samples}
        if len(windows) != 1:
            raise ShapeError(f"samples in a batch must share W, got {sorted(windows)}")
        return cls(
            numeric=np.stack([s.numeric for s in samples]),
            categorical=np.stack([s.categorical for s in samples]),
            targets=np.array([s.target for s in samples], dtype=np.int64),
        )


def window_count(n: int, window: int, stride: int) -> int:
    """Number of windows: max(0, floor((n - W) / stride) + 1)."""
    return max(0, (n - window) // stride + 1)


def make_sequences(
    records: list[FlowRecord], schema: FeatureSchema, vocab: LabelVocab
) -> list[SequenceSample]:
    """Cut a time-ordered record stream into labelled windows.

    Each window takes the label of its last record. Unsorted input is sorted
    stably by ts with a warning.

    Raises:
        LabelVocabError: If a window ends in a label missing from vocab
    """
    if any(a.ts > b.ts for a, b in zip(records, records[1:])):
        logger.warning("records are not sorted by ts; sorting before windowing")
        records = sorted(records, key=lambda r: r.ts)
    w, stride = schema.window, schema.stride
    count = window_count(len(records), w, stride)
    if count == 0:
        return []

    numeric, categorical = encode_records(records, schema)
    samples = []
    for k in range(count):
        start = k * stride
        end = start + w
        samples.append(SequenceSample(
            numeric=numeric[start:end],
            categorical=categorical[start:end],
            target=vocab.id_of(records[end - 1].label),
        ))
    return samples


def batch(
    samples: list[SequenceSample], batch_size: int, seed: int = 0, shuffle: bool = False
) -> list[SequenceBatch]:
    """Group samples into batches, keeping the final partial batch.

    Args:
        samples: Samples sharing one window length
        batch_size: Samples per batch (>= 1)
        seed: Permutation seed when shuffle is set
        shuffle: Visit samples in a seeded random order

    Returns:
        List of SequenceBatch
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be at least 1, got {batch_size}")
    order = np.arange(len(samples))
    if shuffle:
        order = make_rng(seed).permutation(len(samples))
    return [
        SequenceBatch.stack([samples[i] for i in order[start:start + batch_size]])
        for start in range(0, len(samples), batch_size)
    ]
