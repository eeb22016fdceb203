"""train: canonical CSV -> fitted schema, trained checkpoint, history and validation report."""

import argparse
import logging
from pathlib import Path

from src.commands.ingest import VOCAB_FILE
from src.commands.models import RunConfig
from src.commands.options import (
    add_model_options,
    add_run_options,
    add_seed_options,
    add_training_options,
    report_timestamp,
    resolve_run_config,
)
from src.commands.reporting import build_report, format_report, write_report
from src.features.schema import fit_schema
from src.features.sequences import make_sequences
from src.flows.canonical import read_canonical_csv, write_canonical_csv
from src.flows.labels import LabelVocab
from src.flows.records import FlowRecord
from src.flows.sampling import DatasetSplit, split_train_test
from src.model.checkpoint import save_checkpoint
from src.model.ecnet import build_model
from src.training.trainer import train, write_history

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "model.ecnt"
HISTORY_FILE = "history.csv"
SCHEMA_FILE = "schema.json"
TEST_FILE = "test.csv"
VAL_REPORT_FILE = "val_report.json"


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Fit the feature schema and train an EcNet model")
    parser.add_argument("--input", action="extend", nargs=1, required=True, help="Canonical flows CSV")
    parser.add_argument("--vocab", help=f"Label vocabulary (default: {VOCAB_FILE} next to the input)")
    parser.add_argument("--split-ratio", type=float, help="Train fraction of the train/test split")
    parser.add_argument("--val-ratio", type=float, help="Validation fraction carved from train")
    add_seed_options(parser)
    add_model_options(parser)
    add_training_options(parser)
    add_run_options(parser)
    parser.set_defaults(handler=run)


def split_records(cfg: RunConfig, records: list[FlowRecord]) -> tuple[DatasetSplit, list[FlowRecord], list[FlowRecord]]:
    """Stratified train/test split, then a validation slice carved from train.

    Returns:
        (outer split, training records, validation records)
    """
    split = split_train_test(records, cfg.split_ratio, cfg.seeds.sampling)
    train_records, val_records = split.train, []
    if cfg.val_ratio > 0:
        inner = split_train_test(split.train, 1.0 - cfg.val_ratio, cfg.seeds.sampling + 1)
        train_records, val_records = inner.train, inner.test
    logger.info(
        "split %s: %d train, %d validation, %d test records",
        split.split_hash, len(train_records), len(val_records), len(split.test),
    )
    return split, train_records, val_records


def run(args: argparse.Namespace) -> int:
    cfg = resolve_run_config(args)
    source = Path(cfg.inputs[0])
    vocab = LabelVocab.load(args.vocab or source.with_name(VOCAB_FILE))
    records = read_canonical_csv(source)
    out = cfg.output_dir()

    split, train_records, val_records = split_records(cfg, records)

    schema = fit_schema(train_records, cfg.features)
    train_samples = make_sequences(train_records, schema, vocab)
    val_samples = make_sequences(val_records, schema, vocab) if val_records else []
    if not val_samples:
        logger.warning("no validation windows; early stopping and validation report are skipped")

    model_config = cfg.model.with_classes(len(vocab))
    m = build_model(model_config, schema, vocab)
    logger.info("training %s with %d parameters", model_config.variant_name, m.parameter_count())
    m, history = train(m, train_samples, val_samples, cfg.training)

    save_checkpoint(m, out / CHECKPOINT_FILE)
    write_history(history, out / HISTORY_FILE)
    schema.save(out / SCHEMA_FILE)
    write_canonical_csv(split.test, out / TEST_FILE)
    vocab.save(out / VOCAB_FILE)

    print(f"trained {model_config.variant_name} for {len(history)} epoch(s), final loss {history[-1].train_loss:.6f}")
    if val_samples:
        report = build_report(
            m, val_samples, vocab, binary=False, config=cfg.echo(), seed=cfg.seeds.training,
            generated_at=report_timestamp(), workers=cfg.workers,
        )
        write_report(report, out / VAL_REPORT_FILE)
        print(format_report(report))
    return 0
