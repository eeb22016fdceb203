"""
Unit tests for Zeek conn.log parsing, the Zeek writer and the canonical CSV.

Run with: pytest tests/test_zeek.py
"""

import gzip
import io

import numpy as np
import pytest

from src.errors import SchemaError, ZeekParseError
from src.features.encoding import encode_records
from src.features.schema import FeatureConfig, fit_schema
from src.flows.canonical import read_canonical_csv, write_canonical_csv
from src.flows.labels import label_counts
from src.flows.records import FLOW_COLUMNS, Proto
from src.flows.zeek import format_zeek_log, parse_zeek_file, parse_zeek_files, parse_zeek_log
from tests.helpers import FIXTURE_COUNTS

FIELDS = (
    "#fields\tts\tuid\tid.orig_h\tid.orig_p\tid.resp_h\tid.resp_p\tproto\tservice\tduration"
    "\torig_bytes\tresp_bytes\tconn_state\torig_pkts\tresp_pkts\tlabel"
)


def _log(*rows: str) -> list[str]:
    return ["#separator \\x09", FIELDS, *rows]


def test_fixture_counts(zeek_path):
    """The bundled log parses to the hand-counted per-class totals."""
    result = parse_zeek_file(zeek_path)

    assert dict(label_counts(result.records)) == FIXTURE_COUNTS, "Per-class counts should match the fixture"
    assert result.error_count == 2, "The truncated line and the non-numeric byte count should be skipped"
    assert sorted(e.line_number for e in result.errors) == [35, 38], "Errors should carry file line numbers"


def test_iot23_space_separated_label_columns(zeek_path):
    """tunnel_parents, label and detailed-label split on space runs and combine into one label."""
    records = parse_zeek_file(zeek_path).records
    first = records[0]

    assert first.label == "PartOfAHorizontalPortScan", "Detailed label should become the class"
    assert first.label_raw == "Malicious   PartOfAHorizontalPortScan", "Raw label keeps verdict and detail"
    assert records[3].label == "Benign", "A '-' detailed label falls back to the verdict"


def test_unset_fields_become_none(zeek_path):
    """'-' numeric and service values are absent, not zero."""
    scan = parse_zeek_file(zeek_path).records[1]

    assert scan.duration is None, "duration '-' should be None"
    assert scan.orig_bytes is None and scan.resp_bytes is None, "byte counts '-' should be None"
    assert scan.service is None, "service '-' should be None"
    assert scan.orig_pkts == 1, "present counts should parse as integers"
    assert scan.proto is Proto.TCP


def test_records_keep_input_order(zeek_path):
    """Records come back in file order."""
    records = parse_zeek_file(zeek_path).records
    timestamps = [r.ts for r in records]

    assert timestamps == sorted(timestamps), "Fixture timestamps are increasing in file order"
    assert records[0].uid == "CUmrqr4svHuSXJy5z7"
    assert records[-1].uid == "C5sPq93LmvZcJ8wXa1"


def test_comment_only_file_is_rejected():
    """A log with only comment lines has no #fields header."""
    with pytest.raises(ZeekParseError):
        parse_zeek_log(["#separator \\x09", "#path\tconn", "#close\t2018-05-10"])


def test_data_before_fields_header():
    """A data line before #fields is an error naming the line."""
    with pytest.raises(ZeekParseError) as excinfo:
        parse_zeek_log(["#separator \\x09", "1.0\tC1\t1.2.3.4\t1\t5.6.7.8\t2\ttcp"])

    assert excinfo.value.line_number == 2, "Error should name the offending line"


def test_missing_required_column():
    """#fields without a required column is rejected."""
    with pytest.raises(ZeekParseError):
        parse_zeek_log(["#fields\tts\tuid\tlabel"])


def test_wrong_column_count_is_skipped():
    """A short data line is collected as an error; later lines still parse."""
    rows = _log(
        "1.5\tC1\t10.0.0.1\t1000\t10.0.0.2\t80",
        "2.5\tC2\t10.0.0.1\t1001\t10.0.0.2\t80\ttcp\thttp\t0.5\t10\t20\tSF\t2\t3\tBenign",
    )
    result = parse_zeek_log(rows)

    assert len(result.records) == 1
    assert result.errors[0].line_number == 3
    assert "columns" in result.errors[0].reason


def test_empty_field_marker():
    """(empty) in a string column is an empty string, not unset."""
    rows = _log("2.5\tC2\t10.0.0.1\t1001\t10.0.0.2\t80\tudp\t(empty)\t0.5\t10\t20\tSF\t2\t3\tBenign")
    record = parse_zeek_log(rows).records[0]

    assert record.service == "", "(empty) should parse to an empty string"
    assert record.proto is Proto.UDP


def test_negative_byte_count_is_skipped():
    """Values that violate record invariants are skipped like unparseable ones."""
    rows = _log("2.5\tC2\t10.0.0.1\t1001\t10.0.0.2\t80\ttcp\t-\t0.5\t-10\t20\tSF\t2\t3\tBenign")
    result = parse_zeek_log(rows)

    assert result.records == []
    assert result.error_count == 1


@pytest.mark.parametrize("raw", ["nan", "inf", "-inf"])
def test_non_finite_duration_is_skipped(raw):
    """nan/inf durations are counted as bad lines and never reach the records."""
    rows = _log(
        f"1.5\tC1\t10.0.0.1\t1000\t10.0.0.2\t80\ttcp\t-\t{raw}\t10\t20\tSF\t2\t3\tBenign",
        "2.5\tC2\t10.0.0.1\t1001\t10.0.0.2\t80\ttcp\t-\t1.0\t10\t20\tSF\t2\t3\tBenign",
    )
    result = parse_zeek_log(rows)

    assert [r.duration for r in result.records] == [1.0], "Only the finite line should survive"
    assert result.error_count == 1
    assert result.errors[0].line_number == 3
    assert "finite" in result.errors[0].reason


def test_non_finite_values_do_not_poison_schema():
    """After skipping a nan line the fitted duration statistics stay finite."""
    rows = _log(
        "1.5\tC1\t10.0.0.1\t1000\t10.0.0.2\t80\ttcp\t-\tnan\t10\t20\tSF\t2\t3\tBenign",
        "2.5\tC2\t10.0.0.1\t1001\t10.0.0.2\t80\ttcp\t-\t1.0\t10\t20\tSF\t2\t3\tBenign",
        "3.5\tC3\t10.0.0.1\t1002\t10.0.0.2\t80\ttcp\t-\t3.0\t10\t20\tSF\t2\t3\tBenign",
    )
    records = parse_zeek_log(rows).records
    schema = fit_schema(records, FeatureConfig(window=1, stride=1))
    numeric, _ = encode_records(records, schema)

    duration = next(col for col in schema.numeric_cols if col.name == "duration")
    assert (duration.mean, duration.std) == (2.0, 1.0)
    assert np.all(np.isfinite(numeric)), "Every encoded value should be finite"


def test_timestamp_must_be_finite():
    rows = _log("inf\tC1\t10.0.0.1\t1000\t10.0.0.2\t80\ttcp\t-\t1.0\t10\t20\tSF\t2\t3\tBenign")

    assert parse_zeek_log(rows).error_count == 1


def test_header_only_file_is_empty():
    """A #fields header with no data lines gives no records and no errors."""
    result = parse_zeek_log(_log())

    assert result.records == []
    assert result.error_count == 0


def test_bad_separator_escape_names_the_line():
    with pytest.raises(ZeekParseError) as excinfo:
        parse_zeek_log(["#path\tconn", "#separator \\xZZ", FIELDS])

    assert excinfo.value.line_number == 2


def test_gzip_and_parallel_parse(zeek_path, tmp_path):
    """Compressed logs parse identically, and parallel parsing keeps path order."""
    compressed = tmp_path / "conn.log.labeled.gz"
    compressed.write_bytes(gzip.compress(zeek_path.read_bytes()))

    plain, packed = parse_zeek_files([zeek_path, compressed], workers=2)

    assert plain.records == packed.records, "gzip input should parse to the same records"
    assert plain.source == str(zeek_path)
    assert packed.source == str(compressed)


def test_zeek_writer_reparses(zeek_path):
    """format_zeek_log output parses back to the same records."""
    records = parse_zeek_file(zeek_path).records
    text = format_zeek_log(records)
    again = parse_zeek_log(io.StringIO(text)).records

    assert again == records, "Parse -> format -> parse should reproduce every record"


def test_canonical_csv_header_and_reread(zeek_path, tmp_path):
    """The canonical CSV has the fixed column order and reads back unchanged."""
    records = parse_zeek_file(zeek_path).records
    path = tmp_path / "flows.csv"
    write_canonical_csv(records, path)

    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",") == list(FLOW_COLUMNS), "Header should list the canonical columns in order"
    assert read_canonical_csv(path) == records, "CSV should round-trip every field"


def test_canonical_csv_rejects_foreign_columns(tmp_path):
    """A CSV with other columns is a schema error."""
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")

    with pytest.raises(SchemaError):
        read_canonical_csv(path)
