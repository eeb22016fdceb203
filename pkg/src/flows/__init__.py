"""Flow ingestion: Zeek and flow CSV parsing, labels, canonical CSV, sampling and splits."""

from .records import FlowRecord, Proto, FLOW_COLUMNS
from .labels import LabelVocab, build_label_vocab, canonical_label, label_counts
from .zeek import LineError, ZeekParseResult, parse_zeek_log, parse_zeek_file, parse_zeek_files, format_zeek_log
from .flow_csv import FlowCsvMapping, load_mapping, parse_flow_csv, parse_flow_csv_file, parse_flow_csv_files
from .canonical import read_canonical_csv, write_canonical_csv
from .sampling import DatasetSplit, stratified_sample, split_train_test

__all__ = [
    "FlowRecord",
    "Proto",
    "FLOW_COLUMNS",
    "LabelVocab",
    "build_label_vocab",
    "canonical_label",
    "label_counts",
    "LineError",
    "ZeekParseResult",
    "parse_zeek_log",
    "parse_zeek_file",
    "parse_zeek_files",
    "format_zeek_log",
    "FlowCsvMapping",
    "load_mapping",
    "parse_flow_csv",
    "parse_flow_csv_file",
    "parse_flow_csv_files",
    "read_canonical_csv",
    "write_canonical_csv",
    "DatasetSplit",
    "stratified_sample",
    "split_train_test",
]
