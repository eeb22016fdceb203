"""Feature schema: column statistics and vocabularies fitted on training flows."""

import json
import logging
from collections import Counter
from enum import Enum
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.errors import SchemaError
from src.flows.records import FLOW_COLUMNS, FlowRecord

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
OOV_INDEX = 0
# Token used for an absent categorical value
MISSING_TOKEN = "-"

DEFAULT_NUMERIC_COLUMNS = [
    "duration", "orig_bytes", "resp_bytes", "orig_pkts", "resp_pkts", "orig_port", "resp_port",
]
DEFAULT_CATEGORICAL_COLUMNS = ["proto", "service", "conn_state"]


class FeatureConfig(BaseModel):
    """Which columns feed each channel and how flows are windowed."""

    numeric_cols: list[str] = Field(default_factory=lambda: list(DEFAULT_NUMERIC_COLUMNS))
    categorical_cols: list[str] = Field(default_factory=lambda: list(DEFAULT_CATEGORICAL_COLUMNS))
    window: int = Field(10, ge=1, description="Sequence length W")
    stride: int = Field(1, ge=1, description="Window step")


class NumericColumn(BaseModel):
    """Train-set mean and population standard deviation of one column."""

    name: str
    mean: float
    std: float = Field(..., gt=0)


class CategoricalColumn(BaseModel):
    """Value -> index vocabulary; index 0 is reserved for out-of-vocabulary."""

    name: str
    vocabulary: dict[str, int]

    @model_validator(mode="after")
    def _check(self) -> "CategoricalColumn":
        if OOV_INDEX in self.vocabulary.values():
            raise ValueError(f"{self.name}: index {OOV_INDEX} is reserved for OOV")
        return self

    @property
    def width(self) -> int:
        return len(self.vocabulary) + 1


class FeatureSchema(BaseModel):
    """Everything needed to encode flows identically at train and inference time."""

    version: int = SCHEMA_VERSION
    numeric_cols: list[NumericColumn]
    categorical_cols: list[CategoricalColumn]
    window: int = Field(..., ge=1)
    stride: int = Field(..., ge=1)

    @property
    def numeric_width(self) -> int:
        return len(self.numeric_cols)

    @property
    def categorical_width(self) -> int:
        return sum(col.width for col in self.categorical_cols)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureSchema":
        schema = cls.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
        if schema.version > SCHEMA_VERSION:
            raise SchemaError(f"{path}: schema version {schema.version} is newer than {SCHEMA_VERSION}")
        return schema


def categorical_value(record: FlowRecord, column: str) -> str:
    """String form of a categorical field, with MISSING_TOKEN for absent values."""
    value = getattr(record, column)
    if value is None:
        return MISSING_TOKEN
    if isinstance(value, Enum):
        return value.value
    return str(value)


def _check_columns(columns: list[str]) -> None:
    for column in columns:
        if column not in FLOW_COLUMNS:
            raise SchemaError(f"column {column!r} is not a flow record field")


def fit_schema(train: list[FlowRecord], config: FeatureConfig) -> FeatureSchema:
    """Fit normalization statistics and vocabularies on training records only.

    Absent numeric values are excluded from the statistics. A zero-variance
    column is stored with std 1. Categorical values are indexed from 1 by
    descending frequency, ties broken by value.

    Args:
        train: Non-empty list of training records
        config: Column selection and windowing

    Returns:
        Fitted FeatureSchema

    Raises:
        SchemaError: On empty input or a configured column that records lack
    """
    if not train:
        raise SchemaError("cannot fit a schema on zero records")
    _check_columns(config.numeric_cols)
    _check_columns(config.categorical_cols)

    numeric = []
    for column in config.numeric_cols:
        values = np.array([v for r in train if (v := getattr(r, column)) is not None], dtype=np.float64)
        if values.size == 0:
            mean, std = 0.0, 1.0
        else:
            mean, std = float(values.mean()), float(values.std())
        if not std > 0:
            logger.info("column %s has zero variance; storing std 1", column)
            std = 1.0
        numeric.append(NumericColumn(name=column, mean=mean, std=std))

    categorical = []
    for column in config.categorical_cols:
        counts = Counter(categorical_value(r, column) for r in train)
        ordered = sorted(counts, key=lambda value: (-counts[value], value))
        categorical.append(CategoricalColumn(
            name=column,
            vocabulary={value: i for i, value in enumerate(ordered, start=OOV_INDEX + 1)},
        ))

    return FeatureSchema(
        numeric_cols=numeric,
        categorical_cols=categorical,
        window=config.window,
        stride=config.stride,
    )
