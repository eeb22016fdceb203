"""Zeek conn.log(.labeled) reader and writer.

Handles the TSV header directives (#separator, #empty_field, #unset_field,
#fields, #types) and the IoT-23 quirk where the trailing tunnel_parents,
label and detailed-label columns are separated by runs of spaces instead of
the declared separator.
"""

import gzip
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

from src.errors import ZeekParseError
from src.flows.labels import canonical_label
from src.flows.records import FLOAT_COLUMNS, INT_COLUMNS, FlowRecord, Proto

logger = logging.getLogger(__name__)

# Zeek column name -> FlowRecord field
ZEEK_TO_FIELD = {
    "ts": "ts",
    "uid": "uid",
    "id.orig_h": "orig_host",
    "id.orig_p": "orig_port",
    "id.resp_h": "resp_host",
    "id.resp_p": "resp_port",
    "proto": "proto",
    "service": "service",
    "duration": "duration",
    "orig_bytes": "orig_bytes",
    "resp_bytes": "resp_bytes",
    "conn_state": "conn_state",
    "orig_pkts": "orig_pkts",
    "resp_pkts": "resp_pkts",
}
ZEEK_TYPES = {
    "ts": "time",
    "uid": "string",
    "id.orig_h": "addr",
    "id.orig_p": "port",
    "id.resp_h": "addr",
    "id.resp_p": "port",
    "proto": "enum",
    "service": "string",
    "duration": "interval",
    "orig_bytes": "count",
    "resp_bytes": "count",
    "conn_state": "string",
    "orig_pkts": "count",
    "resp_pkts": "count",
    "label": "string",
}
LABEL_COLUMN = "label"
DETAILED_LABEL_COLUMN = "detailed-label"
# Width used when joining label and detailed-label, as IoT-23 writes them
LABEL_JOIN = "   "

_SPACE_RUN = re.compile(r" {2,}")


@dataclass
class LineError:
    """A data line that was skipped."""

    line_number: int
    reason: str


@dataclass
class ZeekParseResult:
    """Records parsed from one log plus the lines that were skipped."""

    records: list[FlowRecord] = field(default_factory=list)
    errors: list[LineError] = field(default_factory=list)
    source: str = "<stream>"

    @property
    def error_count(self) -> int:
        return len(self.errors)


def _decode_separator(value: str, line_number: int) -> str:
    if len(value) == 1:
        return value
    if value.startswith("\\x"):
        try:
            return chr(int(value[2:], 16))
        except ValueError:
            raise ZeekParseError(f"invalid separator escape {value!r}", line_number) from None
    raise ZeekParseError(f"invalid separator {value!r}", line_number)


def _split(line: str, separator: str, expected: int) -> list[str]:
    values = line.split(separator)
    if len(values) == expected:
        return values
    expanded = []
    for value in values:
        expanded.extend(_SPACE_RUN.split(value))
    return expanded


class _Header:
    """Header directives seen so far."""

    def __init__(self):
        self.separator = "\t"
        self.empty_field = "(empty)"
        self.unset_field = "-"
        self.fields: list[str] | None = None

    def consume(self, line: str, line_number: int) -> None:
        body = line[1:]
        if body.startswith("separator"):
            self.separator = _decode_separator(body.split(" ", 1)[1].strip(), line_number)
            return
        parts = body.split(self.separator)
        directive = parts[0]
        if directive == "fields":
            names = []
            for part in parts[1:]:
                names.extend(p for p in _SPACE_RUN.split(part.strip()) if p)
            self.fields = names
            missing = [name for name in (*ZEEK_TO_FIELD, LABEL_COLUMN) if name not in names]
            if missing:
                raise ZeekParseError(f"#fields header lacks columns {missing}", line_number)
        elif directive == "empty_field" and len(parts) > 1:
            self.empty_field = parts[1]
        elif directive == "unset_field" and len(parts) > 1:
            self.unset_field = parts[1]


def _convert(name: str, raw: str, header: _Header):
    if raw == header.unset_field:
        return None
    if name in INT_COLUMNS:
        return None if raw == header.empty_field else int(raw)
    if name in FLOAT_COLUMNS:
        return None if raw == header.empty_field else float(raw)
    if raw == header.empty_field:
        return ""
    return raw


def _build_record(values: dict[str, str], header: _Header) -> FlowRecord:
    kwargs = {ZEEK_TO_FIELD[name]: _convert(ZEEK_TO_FIELD[name], values[name], header)
              for name in ZEEK_TO_FIELD}
    if kwargs["ts"] is None:
        raise ValueError("ts is unset")
    for name in ("uid", "orig_host", "resp_host", "conn_state"):
        if kwargs[name] is None:
            kwargs[name] = header.unset_field
    kwargs["proto"] = Proto.parse(values["proto"])

    label_raw = values[LABEL_COLUMN]
    detailed = values.get(DETAILED_LABEL_COLUMN)
    if detailed is not None:
        label_raw = f"{label_raw}{LABEL_JOIN}{detailed}"
    return FlowRecord(**kwargs, label_raw=label_raw, label=canonical_label(label_raw))


def parse_zeek_log(stream: Iterable[str], source: str = "<stream>") -> ZeekParseResult:
    """Parse a Zeek conn.log.labeled stream into flow records.

    Comment lines are skipped, record order is preserved, `-` fields become
    None. Lines with the wrong column count or unparseable numbers are skipped
    and reported in the result's errors.

    Args:
        stream: Text lines (an open file or any iterable of str)
        source: Name used in log messages

    Returns:
        ZeekParseResult with records and per-line errors

    Raises:
        ZeekParseError: If data appears before a #fields header, or the header
            is missing required columns
    """
    header = _Header()
    result = ZeekParseResult(source=source)
    line_number = 0
    for line_number, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line:
            continue
        if line.startswith("#"):
            header.consume(line, line_number)
            continue
        if header.fields is None:
            raise ZeekParseError("data line before #fields header", line_number)

        values = _split(line, header.separator, len(header.fields))
        if len(values) != len(header.fields):
            result.errors.append(LineError(
                line_number, f"expected {len(header.fields)} columns, got {len(values)}"
            ))
            continue
        try:
            record = _build_record(dict(zip(header.fields, values)), header)
        except ValueError as e:
            result.errors.append(LineError(line_number, f"invalid value: {e}"))
            continue
        result.records.append(record)

    if header.fields is None:
        raise ZeekParseError("missing #fields header", max(line_number, 1))
    if result.errors:
        logger.warning(
            "%s: skipped %d of %d data lines", source, result.error_count,
            result.error_count + len(result.records),
        )
    return result


def _open_log(path: Path) -> TextIO:
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8", errors="replace")
    return open(path, "r", encoding="utf-8", errors="replace")


def parse_zeek_file(path: str | Path) -> ZeekParseResult:
    """Parse one Zeek log from disk (plain or gzip-compressed)."""
    path = Path(path)
    with _open_log(path) as f:
        result = parse_zeek_log(f, source=str(path))
    logger.info("%s: parsed %d records", path, len(result.records))
    return result


def parse_zeek_files(paths: list[str | Path], workers: int = 1) -> list[ZeekParseResult]:
    """Parse several logs, concurrently when workers > 1.

    Results come back in the order of paths regardless of completion order.
    """
    if workers <= 1 or len(paths) <= 1:
        return [parse_zeek_file(p) for p in paths]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(parse_zeek_file, paths))


def _format_value(value, header: _Header) -> str:
    if value is None:
        return header.unset_field
    if isinstance(value, Proto):
        return value.value
    if isinstance(value, float):
        return repr(value)
    if value == "":
        return header.empty_field
    return str(value)


def format_zeek_log(records: list[FlowRecord]) -> str:
    """Serialize records as a Zeek TSV conn log with a single label column."""
    header = _Header()
    names = [*ZEEK_TO_FIELD, LABEL_COLUMN]
    lines = [
        "#separator \\x09",
        "#set_separator\t,",
        f"#empty_field\t{header.empty_field}",
        f"#unset_field\t{header.unset_field}",
        "#path\tconn",
        "#fields\t" + "\t".join(names),
        "#types\t" + "\t".join(ZEEK_TYPES[name] for name in names),
    ]
    for r in records:
        values = [_format_value(getattr(r, ZEEK_TO_FIELD[name]), header) for name in ZEEK_TO_FIELD]
        values.append(r.label_raw)
        lines.append("\t".join(values))
    return "\n".join(lines) + "\n"
