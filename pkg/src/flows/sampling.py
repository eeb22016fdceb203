"""Class-preserving size reduction and stratified train/test splits.

Sampling quota rule:
    quota = floor(budget / n_classes)
    every class first receives min(count, quota) records, so any class at or
    below the quota (e.g. a single C&C-Mirai flow) is kept in full;
    the leftover budget is shared among classes with spare records in
    proportion to their original counts (largest-remainder rounding).
"""

import hashlib
import logging
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from src.errors import SamplingError
from src.flows.records import FlowRecord
from src.nn.core import make_rng

logger = logging.getLogger(__name__)


@dataclass
class DatasetSplit:
    """Disjoint train/test partitions of one record list."""

    train: list[FlowRecord]
    test: list[FlowRecord]
    seed: int
    ratio: float
    train_indices: list[int]
    test_indices: list[int]

    @property
    def split_hash(self) -> str:
        return split_hash(self.train_indices, self.test_indices)


def split_hash(train_indices: list[int], test_indices: list[int]) -> str:
    """SHA-256 over partition membership, identical for identical splits."""
    digest = hashlib.sha256()
    digest.update(",".join(map(str, train_indices)).encode())
    digest.update(b"|")
    digest.update(",".join(map(str, test_indices)).encode())
    return digest.hexdigest()[:16]


def _indices_by_class(records: list[FlowRecord]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = defaultdict(list)
    for i, r in enumerate(records):
        groups[r.label].append(i)
    # Deterministic class order independent of record order
    return dict(sorted(groups.items()))


def allocate_quota(counts: dict[str, int], budget: int) -> dict[str, int]:
    """Per-class sample sizes under the quota rule.

    Args:
        counts: Records per class
        budget: Total number of records to keep (>= number of classes)

    Returns:
        Records to keep per class; sums to min(budget, total)
    """
    quota = budget // len(counts)
    alloc = {name: min(count, quota) for name, count in counts.items()}
    leftover = min(budget, sum(counts.values())) - sum(alloc.values())

    while leftover > 0:
        open_classes = {name: counts[name] for name in counts if alloc[name] < counts[name]}
        weight = sum(open_classes.values())
        shares = {}
        for name, count in open_classes.items():
            exact = leftover * count / weight
            shares[name] = (min(math.floor(exact), counts[name] - alloc[name]), exact - math.floor(exact))
        granted = sum(s for s, _ in shares.values())
        if granted == 0:
            # Hand out single records by largest remainder, then by size
            order = sorted(open_classes, key=lambda n: (-shares[n][1], -counts[n], n))
            for name in order[:leftover]:
                alloc[name] += 1
            leftover -= min(leftover, len(order))
            continue
        for name, (share, _) in shares.items():
            alloc[name] += share
        leftover -= granted
    return alloc


def stratified_sample(records: list[FlowRecord], budget: int, seed: int) -> list[FlowRecord]:
    """Reduce records to at most budget while keeping every class.

    Args:
        records: Parsed records
        budget: Target size, at least the number of distinct classes
        seed: Seed for the per-class uniform draws

    Returns:
        Selected records in their original input order

    Raises:
        SamplingError: On empty input or a budget below the class count
    """
    if not records:
        raise SamplingError("cannot sample from zero records")
    groups = _indices_by_class(records)
    if budget < len(groups):
        raise SamplingError(f"budget {budget} is below the number of classes ({len(groups)})")
    if budget >= len(records):
        return list(records)

    alloc = allocate_quota({name: len(idx) for name, idx in groups.items()}, budget)
    rng = make_rng(seed)
    chosen: list[int] = []
    for name, idx in groups.items():
        take = alloc[name]
        if take >= len(idx):
            chosen.extend(idx)
        else:
            chosen.extend(int(i) for i in rng.choice(idx, size=take, replace=False))
    chosen.sort()
    logger.info("sampled %d of %d records across %d classes", len(chosen), len(records), len(groups))
    return [records[i] for i in chosen]


def split_train_test(records: list[FlowRecord], ratio: float, seed: int) -> DatasetSplit:
    """Stratified, seeded train/test split.

    Each class with n >= 2 records puts floor(n * ratio + 0.5) of them in
    train, clamped to [1, n - 1]. Single-record classes go to train with a
    warning. Both partitions keep the original record order.

    Raises:
        SamplingError: If ratio is not strictly between 0 and 1
    """
    if not 0.0 < ratio < 1.0:
        raise SamplingError(f"ratio must be in (0, 1), got {ratio}")
    rng = make_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for name, idx in _indices_by_class(records).items():
        if len(idx) == 1:
            logger.warning("class %r has a single record; assigning it to train", name)
            train_idx.extend(idx)
            continue
        n_train = min(max(math.floor(len(idx) * ratio + 0.5), 1), len(idx) - 1)
        perm = np.asarray(idx)[rng.permutation(len(idx))]
        train_idx.extend(int(i) for i in perm[:n_train])
        test_idx.extend(int(i) for i in perm[n_train:])
    train_idx.sort()
    test_idx.sort()
    return DatasetSplit(
        train=[records[i] for i in train_idx],
        test=[records[i] for i in test_idx],
        seed=seed,
        ratio=ratio,
        train_indices=train_idx,
        test_indices=test_idx,
    )
