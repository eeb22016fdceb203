"""ablate: train every {cell x attention x feature mode} variant over shared splits.

One CSV row per variant per seed. The data split depends only on the sampling
seed, so every row of a run carries the same split_hash. A failing variant is
recorded as failed and the remaining variants still run.
"""

import argparse
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import pandas as pd
from pydantic import BaseModel

from src.commands.ingest import VOCAB_FILE
from src.commands.models import RunConfig
from src.commands.options import add_model_options, add_run_options, add_training_options, resolve_run_config
from src.commands.train import split_records
from src.errors import EcNetError, SamplingError
from src.features.schema import FeatureSchema, fit_schema
from src.features.sequences import SequenceSample, make_sequences
from src.features.synthetic import SyntheticTask, make_task
from src.flows.canonical import read_canonical_csv
from src.flows.labels import LabelVocab
from src.flows.sampling import split_hash
from src.model.config import FeatureMode, ModelConfig
from src.model.ecnet import build_model
from src.nn.core import make_rng
from src.nn.recurrent import CellType
from src.training.config import TrainConfig
from src.training.metrics import majority_baseline, metrics_from_confusion
from src.training.trainer import evaluate_confusion, train

logger = logging.getLogger(__name__)

ABLATION_FILE = "ablation.csv"
ABLATION_COLUMNS = [
    "variant", "role", "cell", "attention", "feature_mode", "seed", "split_hash",
    "accuracy", "precision", "recall", "f1", "majority_accuracy", "status", "error",
]


class AblationRow(BaseModel):
    variant: str
    role: str = ""
    cell: str
    attention: bool
    feature_mode: str
    seed: int
    split_hash: str
    accuracy: float | None = None
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    majority_accuracy: float | None = None
    status: str = "ok"
    error: str = ""
    exit_code: int = 0


@dataclass
class AblationData:
    """Splits shared by every variant of one run."""

    train: list[SequenceSample]
    val: list[SequenceSample]
    test: list[SequenceSample]
    schema: FeatureSchema
    vocab: LabelVocab
    split_hash: str


@dataclass
class AblationJob:
    model_config: ModelConfig
    train_config: TrainConfig
    seed: int
    data: AblationData


def add_parser(subparsers) -> None:
    # no abbreviations: --cell must not silently become --cells
    parser = subparsers.add_parser(
        "ablate", help="Compare cell, attention and feature-mode variants", allow_abbrev=False,
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", action="extend", nargs=1, help="Canonical flows CSV")
    source.add_argument("--synthetic", choices=[t.value for t in SyntheticTask], help="Generated task")
    parser.add_argument("--vocab", help=f"Label vocabulary (default: {VOCAB_FILE} next to the input)")
    parser.add_argument("--samples", type=int, default=2000, help="Synthetic task size")
    parser.add_argument("--cells", nargs="+", choices=[c.value for c in CellType], default=[c.value for c in CellType])
    parser.add_argument(
        "--attention-variants", nargs="+", choices=["on", "off"], default=["on", "off"],
        help="Which attention settings to run",
    )
    parser.add_argument(
        "--feature-modes", nargs="+", choices=[m.value for m in FeatureMode], default=[m.value for m in FeatureMode]
    )
    parser.add_argument("--seeds", type=int, nargs="+", help="Init/training seeds, one row per variant each")
    parser.add_argument("--seed-sampling", type=int, help="Seed for the shared data split")
    parser.add_argument("--split-ratio", type=float, help="Train fraction of the train/test split")
    parser.add_argument("--val-ratio", type=float, help="Validation fraction carved from train")
    parser.add_argument(
        "--label-noise", type=float, default=0.0, help="Fraction of synthetic labels flipped at random",
    )
    add_model_options(parser, variant_switches=False)
    add_training_options(parser)
    add_run_options(parser)
    parser.set_defaults(handler=run)


def variant_configs(
    base: ModelConfig, cells: list[str], attention: list[bool], modes: list[str]
) -> list[ModelConfig]:
    """Cross product of the ablation switches over a base configuration."""
    return [
        base.model_copy(update={
            "cell_type": CellType(cell), "use_attention": use, "feature_mode": FeatureMode(mode),
        })
        for cell, use, mode in itertools.product(cells, attention, modes)
    ]


def variant_role(config: ModelConfig) -> str:
    """The plain LSTM over merged features without attention is the reference baseline."""
    if (
        config.cell_type is CellType.LSTM
        and not config.use_attention
        and config.feature_mode is FeatureMode.MERGED
    ):
        return "baseline"
    return ""


def synthetic_data(
    cfg: RunConfig, task: SyntheticTask, n_samples: int, label_noise: float = 0.0,
) -> AblationData:
    samples, schema, vocab = make_task(
        task, n_samples, cfg.seeds.sampling, window=cfg.features.window, label_noise=label_noise,
    )
    order = make_rng(cfg.seeds.sampling).permutation(len(samples))
    n_train = int(round(len(samples) * cfg.split_ratio))
    n_val = int(round(n_train * cfg.val_ratio))
    train_idx = sorted(int(i) for i in order[n_val:n_train])
    val_idx = sorted(int(i) for i in order[:n_val])
    test_idx = sorted(int(i) for i in order[n_train:])
    return AblationData(
        train=[samples[i] for i in train_idx],
        val=[samples[i] for i in val_idx],
        test=[samples[i] for i in test_idx],
        schema=schema,
        vocab=vocab,
        split_hash=split_hash(sorted(train_idx + val_idx), test_idx),
    )


def flow_data(cfg: RunConfig, vocab_path: str | None) -> AblationData:
    source = Path(cfg.inputs[0])
    vocab = LabelVocab.load(vocab_path or source.with_name(VOCAB_FILE))
    records = read_canonical_csv(source)
    split, train_records, val_records = split_records(cfg, records)
    schema = fit_schema(train_records, cfg.features)
    return AblationData(
        train=make_sequences(train_records, schema, vocab),
        val=make_sequences(val_records, schema, vocab) if val_records else [],
        test=make_sequences(split.test, schema, vocab),
        schema=schema,
        vocab=vocab,
        split_hash=split.split_hash,
    )


def run_variant(job: AblationJob) -> AblationRow:
    """Train and score one variant; failures become a failed row."""
    config = job.model_config.model_copy(update={"seed": job.seed})
    row = AblationRow(
        variant=config.variant_name,
        role=variant_role(config),
        cell=config.cell_type.value,
        attention=config.use_attention,
        feature_mode=config.feature_mode.value,
        seed=job.seed,
        split_hash=job.data.split_hash,
    )
    try:
        m = build_model(config, job.data.schema, job.data.vocab)
        train_config = job.train_config.model_copy(update={"seed": job.seed})
        train(m, job.data.train, job.data.val, train_config)
        _, truth, cm = evaluate_confusion(m, job.data.test)
        report = metrics_from_confusion(cm, job.data.vocab.names)
        majority = majority_baseline(truth, len(job.data.vocab))
    except (EcNetError, ValueError) as e:
        logger.warning("variant %s seed %d failed: %s", row.variant, job.seed, e)
        return row.model_copy(update={
            "status": "failed", "error": str(e), "exit_code": getattr(e, "exit_code", 2),
        })
    return row.model_copy(update={
        "accuracy": report.accuracy,
        "precision": report.macro.precision,
        "recall": report.macro.recall,
        "f1": report.macro.f1,
        "majority_accuracy": majority.accuracy,
    })


def run_ablation(jobs: list[AblationJob], workers: int = 1) -> list[AblationRow]:
    """Run jobs, in worker processes when workers > 1, returning rows in job order."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(run_variant, jobs))
    return [run_variant(job) for job in jobs]


def ablation_frame(rows: list[AblationRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=ABLATION_COLUMNS)


def run(args: argparse.Namespace) -> int:
    cfg = resolve_run_config(args)
    out = cfg.output_dir()
    if args.synthetic:
        data = synthetic_data(cfg, SyntheticTask(args.synthetic), args.samples, args.label_noise)
    else:
        data = flow_data(cfg, args.vocab)
    base = cfg.model.with_classes(len(data.vocab))
    if not data.test:
        raise SamplingError("ablation test split has no windows")

    attention = [choice == "on" for choice in args.attention_variants]
    configs = variant_configs(base, args.cells, attention, args.feature_modes)
    seeds = args.seeds or [cfg.seeds.init]
    jobs = [
        AblationJob(model_config=config, train_config=cfg.training, seed=seed, data=data)
        for config in configs
        for seed in seeds
    ]
    logger.info("running %d variant(s) x %d seed(s) on split %s", len(configs), len(seeds), data.split_hash)

    rows = run_ablation(jobs, cfg.workers)
    frame = ablation_frame(rows)
    frame.to_csv(out / ABLATION_FILE, index=False, lineterminator="\n", float_format="%.10g")
    print(frame.drop(columns=["error"]).to_string(index=False))

    failed = [row for row in rows if row.status != "ok"]
    if failed:
        print(f"{len(failed)} of {len(rows)} variant run(s) failed")
        return max(row.exit_code for row in failed)
    return 0
