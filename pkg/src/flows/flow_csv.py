"""Labelled flow CSV reader (BoT-IoT, IoT-NI, MQTT, MQTTset and similar exports).

A FlowCsvMapping names which CSV column feeds each FlowRecord field and how
the label is built. Rows that cannot become a record are skipped and reported
like malformed Zeek lines, with CSV line numbers (the header is line 1).
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from functools import partial
from pathlib import Path

import pandas as pd
from pydantic import BaseModel, Field, field_validator, model_validator

from src.errors import LabelVocabError, SchemaError
from src.flows.labels import BENIGN_NAME, canonical_label
from src.flows.records import FLOW_COLUMNS, INT_COLUMNS, FlowRecord, Proto
from src.flows.zeek import LineError, ZeekParseResult

logger = logging.getLogger(__name__)

# IANA protocol numbers seen in flow exports
IANA_PROTOCOLS = {1: Proto.ICMP, 6: Proto.TCP, 17: Proto.UDP}
MISSING = ("", "-")
MAPPABLE_FIELDS = tuple(name for name in FLOW_COLUMNS if name not in ("label", "label_raw"))


class TimestampFormat(str, Enum):
    """seconds: numeric epoch seconds (scaled by ts_scale); datetime: date text; row: CSV row order."""
    SECONDS = "seconds"
    DATETIME = "datetime"
    ROW = "row"


class FlowCsvMapping(BaseModel):
    """Column and label mapping from one flow CSV layout onto FlowRecord.

    The label is the label columns joined with single spaces, or the file label
    whose key prefixes the file name when no label column exists. label_map
    renames a joined label before canonicalisation; a label whose first part
    is in benign_labels becomes the benign class.
    """

    name: str = "custom"
    columns: dict[str, str] = Field(default_factory=dict, description="FlowRecord field -> CSV column")
    label_columns: list[str] = Field(default_factory=list)
    file_labels: dict[str, str] = Field(default_factory=dict, description="File name prefix -> raw label")
    label_map: dict[str, str] = Field(default_factory=dict)
    benign_labels: list[str] = Field(default_factory=lambda: ["normal", "benign", "legitimate"])
    timestamp: TimestampFormat = TimestampFormat.SECONDS
    ts_scale: float = Field(1.0, gt=0, description="Multiplier from the ts column to seconds")
    duration_scale: float = Field(1.0, gt=0, description="Multiplier from the duration column to seconds")
    default_proto: Proto = Proto.OTHER

    @field_validator("columns")
    @classmethod
    def _known_fields(cls, columns: dict[str, str]) -> dict[str, str]:
        unknown = sorted(set(columns) - set(MAPPABLE_FIELDS))
        if unknown:
            raise ValueError(f"unknown record fields {unknown}; choose from {list(MAPPABLE_FIELDS)}")
        return columns

    @model_validator(mode="after")
    def _has_label_source(self) -> "FlowCsvMapping":
        if not self.label_columns and not self.file_labels:
            raise ValueError("mapping needs label_columns or file_labels")
        if self.timestamp is not TimestampFormat.ROW and "ts" not in self.columns:
            raise ValueError("mapping has no ts column; use timestamp 'row' for row order")
        return self

    def is_benign(self, value: str) -> bool:
        return value.strip().lower() in {b.lower() for b in self.benign_labels}

    def file_label(self, path: Path) -> str | None:
        """Raw label of the longest file_labels key that prefixes the file name."""
        matches = [key for key in self.file_labels if path.name.lower().startswith(key.lower())]
        if not matches:
            return None
        return self.file_labels[max(matches, key=len)]


PRESETS: dict[str, FlowCsvMapping] = {
    "bot-iot": FlowCsvMapping(
        name="bot-iot",
        columns={
            "ts": "stime", "uid": "pkSeqID", "orig_host": "saddr", "orig_port": "sport",
            "resp_host": "daddr", "resp_port": "dport", "proto": "proto", "duration": "dur",
            "orig_bytes": "sbytes", "resp_bytes": "dbytes", "orig_pkts": "spkts", "resp_pkts": "dpkts",
            "conn_state": "state",
        },
        label_columns=["category", "subcategory"],
    ),
    # CICFlowMeter export: microsecond durations, dd/mm/yyyy timestamps
    "iot-ni": FlowCsvMapping(
        name="iot-ni",
        columns={
            "ts": "Timestamp", "uid": "Flow_ID", "orig_host": "Src_IP", "orig_port": "Src_Port",
            "resp_host": "Dst_IP", "resp_port": "Dst_Port", "proto": "Protocol", "duration": "Flow_Duration",
            "orig_bytes": "TotLen_Fwd_Pkts", "resp_bytes": "TotLen_Bwd_Pkts",
            "orig_pkts": "Tot_Fwd_Pkts", "resp_pkts": "Tot_Bwd_Pkts",
        },
        label_columns=["Cat"],
        timestamp=TimestampFormat.DATETIME,
        duration_scale=1e-6,
    ),
    # bidirectional flow features, one file per scenario
    "mqtt": FlowCsvMapping(
        name="mqtt",
        columns={
            "orig_host": "ip_src", "orig_port": "prt_src", "resp_host": "ip_dst", "resp_port": "prt_dst",
            "proto": "proto", "orig_bytes": "fwd_num_bytes", "resp_bytes": "bwd_num_bytes",
            "orig_pkts": "fwd_num_pkts", "resp_pkts": "bwd_num_pkts",
        },
        file_labels={
            "normal": "Normal",
            "mqtt_bruteforce": "MQTT Brute Force attack",
            "scan_A": "Aggressive scan attack",
            "scan_sU": "UDP scan attack",
            "sparta": "Sparta SSH brute force",
        },
        timestamp=TimestampFormat.ROW,
    ),
    # packet-level MQTT fields; every row is TCP and there are no addresses
    "mqttset": FlowCsvMapping(
        name="mqttset",
        columns={"duration": "tcp.time_delta", "orig_bytes": "tcp.len"},
        label_columns=["target"],
        label_map={
            "bruteforce": "Bruteforce", "flood": "MQTTFlood", "malaria": "MalariaDos",
            "malformed": "Malformed", "slowite": "SlowITe", "dos": "DoS",
        },
        timestamp=TimestampFormat.ROW,
        default_proto=Proto.TCP,
    ),
}


def load_mapping(name_or_path: str) -> FlowCsvMapping:
    """A preset by name, or a mapping read from a JSON file.

    Raises:
        FileNotFoundError: If it is neither a preset nor an existing file
        pydantic.ValidationError: If the JSON does not describe a valid mapping
    """
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    path = Path(name_or_path)
    if not path.is_file():
        raise FileNotFoundError(f"flow CSV mapping {name_or_path!r} is not a preset ({', '.join(PRESETS)}) or a file")
    return FlowCsvMapping.model_validate(json.loads(path.read_text(encoding="utf-8")))


def _missing(raw) -> bool:
    return raw is None or str(raw).strip() in MISSING


def parse_port(raw) -> int | None:
    """Decimal or 0x-prefixed hexadecimal port; absent values are None."""
    if _missing(raw):
        return None
    text = str(raw).strip()
    if text.lower().startswith("0x"):
        return int(text, 16)
    return parse_count(text)


def parse_count(raw) -> int | None:
    """Integer count; integral floats such as '12.0' are accepted."""
    if _missing(raw):
        return None
    text = str(raw).strip()
    try:
        return int(text)
    except ValueError:
        value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def parse_proto(raw, default: Proto = Proto.OTHER) -> Proto:
    """Protocol name or IANA protocol number."""
    if _missing(raw):
        return default
    text = str(raw).strip()
    if text.isdigit():
        return IANA_PROTOCOLS.get(int(text), Proto.OTHER)
    return Proto.parse(text)


def _datetime_seconds(column: pd.Series) -> list[float]:
    """Epoch seconds of day-first date text; unparseable values become nan."""
    parsed = pd.to_datetime(column, dayfirst=True, errors="coerce")
    seconds = (parsed - pd.Timestamp("1970-01-01")) / pd.Timedelta(seconds=1)
    return [float(v) for v in seconds]


def _label(row: dict, mapping: FlowCsvMapping, file_label: str | None) -> tuple[str, str]:
    if mapping.label_columns:
        parts = [str(row[c]).strip() for c in mapping.label_columns]
        parts = [p for p in parts if p not in MISSING]
    else:
        parts = [file_label] if file_label else []
    if not parts:
        raise LabelVocabError("empty label")
    label_raw = " ".join(parts)
    if mapping.is_benign(parts[0]):
        return label_raw, BENIGN_NAME
    mapped = mapping.label_map.get(label_raw, mapping.label_map.get(label_raw.lower(), label_raw))
    if mapping.is_benign(mapped):
        return label_raw, BENIGN_NAME
    return label_raw, canonical_label(mapped)


def _build_record(
    row: dict,
    offset: int,
    dates: list[float] | None,
    mapping: FlowCsvMapping,
    file_label: str | None,
    file_name: str,
) -> FlowRecord:
    def raw(name: str):
        column = mapping.columns.get(name)
        return None if column is None else row[column]

    if mapping.timestamp is TimestampFormat.ROW:
        ts = float(offset)
    elif dates is not None:
        ts = dates[offset]
    elif _missing(raw("ts")):
        raise ValueError("ts is unset")
    else:
        ts = float(raw("ts")) * mapping.ts_scale

    values = {}
    for name in ("orig_port", "resp_port"):
        values[name] = parse_port(raw(name))
    for name in INT_COLUMNS:
        if name not in values:
            values[name] = parse_count(raw(name))
    duration = raw("duration")
    values["duration"] = None if _missing(duration) else float(duration) * mapping.duration_scale
    for name in ("uid", "orig_host", "resp_host", "conn_state"):
        value = raw(name)
        values[name] = "-" if _missing(value) else str(value).strip()
    if values["uid"] == "-":
        values["uid"] = f"{file_name}:{offset + 2}"
    service = raw("service")
    values["service"] = None if _missing(service) else str(service).strip()
    values["proto"] = parse_proto(raw("proto"), mapping.default_proto)

    label_raw, label = _label(row, mapping, file_label)
    return FlowRecord(ts=ts, **values, label_raw=label_raw, label=label)


def parse_flow_csv(
    frame: pd.DataFrame, mapping: FlowCsvMapping, source: str = "<frame>", file_label: str | None = None
) -> ZeekParseResult:
    """Convert a flow CSV already loaded as strings into flow records.

    Args:
        frame: CSV contents with every column read as str
        mapping: Column and label mapping
        source: Name used for generated uids and log messages
        file_label: Raw label for every row when the mapping has no label columns

    Returns:
        ZeekParseResult with records in row order and per-row errors

    Raises:
        SchemaError: If a mapped column is absent, or no label source applies
    """
    frame = frame.rename(columns=lambda c: str(c).strip())
    wanted = [*mapping.columns.values(), *mapping.label_columns]
    missing = [c for c in wanted if c not in frame.columns]
    if missing:
        raise SchemaError(f"{source}: {mapping.name} mapping needs columns {missing}")
    if not mapping.label_columns and file_label is None:
        raise SchemaError(f"{source}: no file label in {mapping.name} mapping matches this file")

    result = ZeekParseResult(source=source)
    file_name = Path(source).name
    dates = None
    if mapping.timestamp is TimestampFormat.DATETIME:
        dates = _datetime_seconds(frame[mapping.columns["ts"]])
    for offset, row in enumerate(frame.to_dict("records")):
        line_number = offset + 2
        try:
            record = _build_record(row, offset, dates, mapping, file_label, file_name)
        except (ValueError, LabelVocabError) as e:
            result.errors.append(LineError(line_number, f"invalid value: {e}"))
            continue
        result.records.append(record)

    if result.errors:
        logger.warning(
            "%s: skipped %d of %d rows", source, result.error_count, result.error_count + len(result.records),
        )
    return result


def parse_flow_csv_file(path: str | Path, mapping: FlowCsvMapping) -> ZeekParseResult:
    """Parse one flow CSV from disk (plain or compressed, by extension)."""
    path = Path(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8", encoding_errors="replace")
    result = parse_flow_csv(frame, mapping, source=str(path), file_label=mapping.file_label(path))
    logger.info("%s: parsed %d records with the %s mapping", path, len(result.records), mapping.name)
    return result


def parse_flow_csv_files(
    paths: list[str | Path], mapping: FlowCsvMapping, workers: int = 1
) -> list[ZeekParseResult]:
    """Parse several flow CSVs, concurrently when workers > 1, returning results in path order."""
    parse = partial(parse_flow_csv_file, mapping=mapping)
    if workers <= 1 or len(paths) <= 1:
        return [parse(p) for p in paths]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(parse, paths))
