"""Feature encoding: fitted schema, record encoding, windows and batches."""

from .schema import FeatureConfig, FeatureSchema, NumericColumn, CategoricalColumn, fit_schema
from .encoding import encode_record, encode_records
from .sequences import SequenceSample, SequenceBatch, make_sequences, batch, window_count

__all__ = [
    "FeatureConfig",
    "FeatureSchema",
    "NumericColumn",
    "CategoricalColumn",
    "fit_schema",
    "encode_record",
    "encode_records",
    "SequenceSample",
    "SequenceBatch",
    "make_sequences",
    "batch",
    "window_count",
]
