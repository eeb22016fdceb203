"""Canonical flow CSV (see docs/canonical-csv.md for the column contract)."""

import math
from pathlib import Path

import pandas as pd

from src.errors import SchemaError
from src.flows.records import FLOAT_COLUMNS, FLOW_COLUMNS, INT_COLUMNS, FlowRecord, Proto

UNSET = "-"
OPTIONAL_STRING_COLUMNS = ("service",)


def records_to_frame(records: list[FlowRecord]) -> pd.DataFrame:
    """Build a DataFrame in canonical column order with nullable integer columns."""
    rows = [
        {name: (getattr(r, name).value if name == "proto" else getattr(r, name)) for name in FLOW_COLUMNS}
        for r in records
    ]
    df = pd.DataFrame(rows, columns=list(FLOW_COLUMNS))
    for name in INT_COLUMNS:
        df[name] = df[name].astype("Int64")
    for name in FLOAT_COLUMNS:
        df[name] = df[name].astype("float64")
    return df


def write_canonical_csv(records: list[FlowRecord], path: str | Path) -> None:
    """Write records as UTF-8 CSV with a header row; absent values become `-`."""
    df = records_to_frame(records)
    df.to_csv(path, index=False, na_rep=UNSET, encoding="utf-8", lineterminator="\n")


def _optional(value):
    if value is None or value is pd.NA:
        return None
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def read_canonical_csv(path: str | Path) -> list[FlowRecord]:
    """Read a canonical CSV back into FlowRecords.

    Raises:
        SchemaError: If the header does not match the canonical column order
    """
    dtypes = {name: str for name in FLOW_COLUMNS}
    dtypes.update({name: "Int64" for name in INT_COLUMNS})
    dtypes.update({name: "float64" for name in FLOAT_COLUMNS})
    na_values = {name: [UNSET] for name in (*INT_COLUMNS, *FLOAT_COLUMNS, *OPTIONAL_STRING_COLUMNS)}
    df = pd.read_csv(
        path,
        dtype=dtypes,
        keep_default_na=False,
        na_values=na_values,
        float_precision="round_trip",
        encoding="utf-8",
    )
    if tuple(df.columns) != FLOW_COLUMNS:
        raise SchemaError(f"{path}: expected columns {list(FLOW_COLUMNS)}, got {list(df.columns)}")

    records = []
    for row in df.itertuples(index=False):
        values = {name: _optional(getattr(row, name)) for name in FLOW_COLUMNS}
        for name in INT_COLUMNS:
            if values[name] is not None:
                values[name] = int(values[name])
        for name in FLOAT_COLUMNS:
            if values[name] is not None:
                values[name] = float(values[name])
        values["proto"] = Proto(values["proto"])
        records.append(FlowRecord(**values))
    return records
