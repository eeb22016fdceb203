"""ingest: Zeek logs or labelled flow CSVs -> sampled canonical CSV, label vocabulary and count summary."""

import argparse
import json
import logging

from src.commands.models import InputFormat, RunConfig
from src.commands.options import add_run_options, report_timestamp, resolve_run_config
from src.errors import SamplingError
from src.flows.canonical import write_canonical_csv
from src.flows.flow_csv import PRESETS, load_mapping, parse_flow_csv_files
from src.flows.labels import LabelVocab, count_table, label_counts
from src.flows.sampling import stratified_sample
from src.flows.zeek import ZeekParseResult, parse_zeek_files

logger = logging.getLogger(__name__)

FLOWS_FILE = "flows.csv"
VOCAB_FILE = "vocab.json"
SUMMARY_FILE = "ingest_summary.json"


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("ingest", help="Parse labelled Zeek logs or flow CSVs into a canonical CSV")
    parser.add_argument(
        "--input", action="extend", nargs="+", required=True,
        help="conn.log.labeled file(s) or flow CSV(s), optionally compressed",
    )
    parser.add_argument(
        "--format", dest="input_format", choices=[f.value for f in InputFormat], help="Input layout (default: zeek)",
    )
    parser.add_argument(
        "--mapping", help=f"Flow CSV mapping: a preset ({', '.join(PRESETS)}) or a JSON file",
    )
    parser.add_argument("--budget", type=int, help="Stratified sampling budget (default: keep all)")
    parser.add_argument("--seed-sampling", type=int, help="Seed for sampling")
    add_run_options(parser)
    parser.set_defaults(handler=run)


def parse_inputs(cfg: RunConfig) -> list[ZeekParseResult]:
    """Parse every input with the reader its format selects."""
    if cfg.input_format is InputFormat.FLOW_CSV:
        mapping = load_mapping(cfg.mapping)
        logger.info("reading %d flow CSV(s) with the %s mapping", len(cfg.inputs), mapping.name)
        return parse_flow_csv_files(cfg.inputs, mapping, workers=cfg.workers)
    return parse_zeek_files(cfg.inputs, workers=cfg.workers)


def run(args: argparse.Namespace) -> int:
    cfg = resolve_run_config(args)
    out = cfg.output_dir()

    results = parse_inputs(cfg)
    records = [r for result in results for r in result.records]
    skipped = sum(result.error_count for result in results)
    parsed_counts = label_counts(records)
    if not records:
        raise SamplingError(f"no valid flow records in {len(cfg.inputs)} input file(s)")
    if cfg.budget is not None:
        records = stratified_sample(records, cfg.budget, cfg.seeds.sampling)
    sampled_counts = label_counts(records)

    vocab = LabelVocab.from_counts(dict(sampled_counts))
    write_canonical_csv(records, out / FLOWS_FILE)
    vocab.save(out / VOCAB_FILE)
    summary = {
        "records_parsed": sum(parsed_counts.values()),
        "lines_skipped": skipped,
        "records_written": len(records),
        "counts": count_table(dict(parsed_counts)),
        "sampled_counts": count_table(dict(sampled_counts)),
        "config": cfg.echo(),
        "generated_at": report_timestamp(),
    }
    (out / SUMMARY_FILE).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    logger.info("wrote %d records to %s", len(records), out / FLOWS_FILE)

    print(f"{'label':<40} {'parsed':>10} {'kept':>10}")
    for row in summary["counts"]:
        print(f"{row['label']:<40} {row['count']:>10d} {sampled_counts.get(row['label'], 0):>10d}")
    print(f"{'total':<40} {summary['records_parsed']:>10d} {len(records):>10d}")
    if skipped:
        print(f"{skipped} malformed line(s) skipped")
    return 0
