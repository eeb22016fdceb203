"""Generated sequence tasks with known answers.

sign     class = sign of the window mean of numeric channel 0
salient  one timestep in the first half of the window carries a marker token
         and a large value on numeric channel 0 whose sign is the class; every
         other timestep is low-amplitude noise, so the answer sits at least
         window // 2 steps before the final hidden state

label_noise flips that fraction of targets after generation, which keeps any
model strictly below perfect accuracy.
"""

from enum import Enum

import numpy as np

from src.features.schema import CategoricalColumn, FeatureSchema, NumericColumn
from src.features.sequences import SequenceSample
from src.flows.labels import LabelVocab
from src.nn.core import make_rng

TOKENS = ("t1", "t2", "t3", "marker")


class SyntheticTask(str, Enum):
    SIGN = "sign"
    SALIENT = "salient"


def synthetic_schema(d_num: int, window: int) -> FeatureSchema:
    """Identity-normalized schema matching the generated channels."""
    return FeatureSchema(
        numeric_cols=[NumericColumn(name=f"x{j}", mean=0.0, std=1.0) for j in range(d_num)],
        categorical_cols=[CategoricalColumn(
            name="token", vocabulary={tok: i for i, tok in enumerate(TOKENS, start=1)},
        )],
        window=window,
        stride=1,
    )


def synthetic_vocab() -> LabelVocab:
    return LabelVocab(names=["Benign", "Malicious"], benign_id=0)


def _one_hot(indices: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros((indices.size, width))
    out[np.arange(indices.size), indices] = 1.0
    return out


def make_sign_task(n_samples: int, window: int, d_num: int, rng: np.random.Generator) -> list[SequenceSample]:
    samples = []
    for _ in range(n_samples):
        level = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 1.0)
        numeric = rng.normal(0.0, 1.0, size=(window, d_num))
        numeric[:, 0] = level + rng.normal(0.0, 0.5, size=window)
        tokens = rng.integers(1, len(TOKENS), size=window)
        samples.append(SequenceSample(
            numeric=numeric,
            categorical=_one_hot(tokens, len(TOKENS) + 1),
            target=int(numeric[:, 0].mean() > 0),
        ))
    return samples


def make_salient_task(n_samples: int, window: int, d_num: int, rng: np.random.Generator) -> list[SequenceSample]:
    marker = TOKENS.index("marker") + 1
    # early positions only: [0, window // 2)
    last_position = max(1, window // 2)
    samples = []
    for _ in range(n_samples):
        target = int(rng.integers(0, 2))
        position = int(rng.integers(0, last_position))
        numeric = rng.normal(0.0, 0.3, size=(window, d_num))
        numeric[position, 0] = (1.0 if target else -1.0) * rng.uniform(2.0, 3.0)
        tokens = rng.integers(1, marker, size=window)
        tokens[position] = marker
        samples.append(SequenceSample(
            numeric=numeric,
            categorical=_one_hot(tokens, len(TOKENS) + 1),
            target=target,
        ))
    return samples


def flip_labels(samples: list[SequenceSample], fraction: float, rng: np.random.Generator) -> list[SequenceSample]:
    """Flip the binary target of round(fraction * n) samples chosen without replacement."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"label noise must be in [0, 1], got {fraction}")
    n_flip = int(round(fraction * len(samples)))
    if n_flip == 0:
        return samples
    flipped = set(int(i) for i in rng.choice(len(samples), size=n_flip, replace=False))
    return [
        SequenceSample(numeric=s.numeric, categorical=s.categorical, target=1 - s.target) if i in flipped else s
        for i, s in enumerate(samples)
    ]


def make_task(
    task: SyntheticTask, n_samples: int, seed: int, window: int = 10, d_num: int = 3, label_noise: float = 0.0,
) -> tuple[list[SequenceSample], FeatureSchema, LabelVocab]:
    """Generate a synthetic task with its schema and 2-class vocabulary.

    Args:
        task: Which task to generate
        n_samples: Number of windows
        seed: Generator seed
        window: Sequence length W
        d_num: Numeric channel width
        label_noise: Fraction of targets flipped after generation

    Returns:
        (samples, schema, vocab)

    Raises:
        ValueError: If label_noise is outside [0, 1]
    """
    rng = make_rng(seed)
    if SyntheticTask(task) is SyntheticTask.SIGN:
        samples = make_sign_task(n_samples, window, d_num, rng)
    else:
        samples = make_salient_task(n_samples, window, d_num, rng)
    samples = flip_labels(samples, label_noise, rng)
    return samples, synthetic_schema(d_num, window), synthetic_vocab()
