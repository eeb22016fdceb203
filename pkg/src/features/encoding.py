"""Encode flow records into numeric (z-scored) and categorical (one-hot) rows."""

import numpy as np

from src.features.schema import OOV_INDEX, FeatureSchema, categorical_value
from src.flows.records import FlowRecord
from src.nn.core import Matrix


def encode_record(r: FlowRecord, schema: FeatureSchema) -> tuple[Matrix, Matrix]:
    """Encode one record.

    Numeric entries are (x - mean) / std, with absent values imputed as 0
    (the mean). Categorical entries are one-hot blocks per column, concatenated;
    values unseen at fit time hit each block's OOV slot.

    Args:
        r: Flow record
        schema: Fitted feature schema

    Returns:
        (numeric row of length D_num, categorical row of length D_cat)
    """
    numeric = np.zeros(schema.numeric_width)
    for j, col in enumerate(schema.numeric_cols):
        value = getattr(r, col.name)
        if value is not None:
            numeric[j] = (float(value) - col.mean) / col.std

    categorical = np.zeros(schema.categorical_width)
    offset = 0
    for col in schema.categorical_cols:
        index = col.vocabulary.get(categorical_value(r, col.name), OOV_INDEX)
        categorical[offset + index] = 1.0
        offset += col.width
    return numeric, categorical


def encode_records(records: list[FlowRecord], schema: FeatureSchema) -> tuple[Matrix, Matrix]:
    """Encode many records into (N x D_num, N x D_cat) matrices."""
    numeric = np.zeros((len(records), schema.numeric_width))
    categorical = np.zeros((len(records), schema.categorical_width))
    for i, r in enumerate(records):
        numeric[i], categorical[i] = encode_record(r, schema)
    return numeric, categorical
