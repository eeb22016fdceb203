"""eval: checkpoint + canonical CSV -> JSON evaluation report."""

import argparse
import logging
from pathlib import Path

from src.commands.options import add_run_options, report_timestamp, resolve_run_config
from src.commands.reporting import build_report, format_report, write_report
from src.errors import IncompatibleDataError
from src.features.schema import FeatureSchema
from src.features.sequences import make_sequences
from src.flows.canonical import read_canonical_csv
from src.flows.labels import LabelVocab, label_counts
from src.model.checkpoint import load_checkpoint
from src.model.ecnet import EcNetModel

logger = logging.getLogger(__name__)


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate a checkpoint on a canonical CSV")
    parser.add_argument("--checkpoint", required=True, help="Model checkpoint written by train")
    parser.add_argument("--input", action="extend", nargs=1, required=True, help="Canonical flows CSV")
    parser.add_argument("--vocab", help="Label vocabulary the data was ingested with")
    parser.add_argument("--schema", help="Feature schema the data is expected to match")
    parser.add_argument("--binary", action="store_true", help="Collapse classes to benign/malicious")
    add_run_options(parser)
    parser.set_defaults(handler=run)


def check_compatible(
    m: EcNetModel, labels: set[str], vocab: LabelVocab | None = None, schema: FeatureSchema | None = None
) -> None:
    """Reject data whose labels, vocabulary or schema disagree with the checkpoint.

    Raises:
        IncompatibleDataError: Listing every mismatch found
    """
    problems = []
    unknown = sorted(labels - set(m.vocab.names))
    if unknown:
        problems.append(f"labels not in checkpoint vocabulary: {unknown}")
    if vocab is not None and vocab.names != m.vocab.names:
        problems.append(f"vocabulary {vocab.names} differs from checkpoint vocabulary {m.vocab.names}")
    if schema is not None and schema != m.schema:
        problems.append("feature schema differs from the checkpoint schema")
    if problems:
        raise IncompatibleDataError("; ".join(problems))


def run(args: argparse.Namespace) -> int:
    cfg = resolve_run_config(args)
    m = load_checkpoint(args.checkpoint)
    records = read_canonical_csv(cfg.inputs[0])
    check_compatible(
        m,
        set(label_counts(records)),
        LabelVocab.load(args.vocab) if args.vocab else None,
        FeatureSchema.load(args.schema) if args.schema else None,
    )
    samples = make_sequences(records, m.schema, m.vocab)
    if not samples:
        raise IncompatibleDataError(f"{len(records)} records is fewer than the window length {m.schema.window}")

    out = cfg.output_dir()
    echo = {
        "inputs": cfg.echo()["inputs"],
        "checkpoint": Path(args.checkpoint).name,
        "binary": cfg.binary,
        "model": m.config.model_dump(mode="json"),
        "features": {
            "numeric_cols": [col.name for col in m.schema.numeric_cols],
            "categorical_cols": [col.name for col in m.schema.categorical_cols],
            "window": m.schema.window,
            "stride": m.schema.stride,
        },
    }
    report = build_report(
        m, samples, m.vocab, binary=cfg.binary, config=echo, seed=m.config.seed,
        generated_at=report_timestamp(), workers=cfg.workers,
    )
    name = "eval_report_binary.json" if cfg.binary else "eval_report.json"
    write_report(report, out / name)
    print(format_report(report))
    return 0
