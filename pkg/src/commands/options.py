"""Shared command-line flags and their mapping onto RunConfig."""

import argparse
from datetime import datetime, timezone
from typing import Any

from src.commands.models import RunConfig, load_run_config
from src.config import get_settings
from src.model.config import FeatureMode
from src.nn.attention import Pooling
from src.nn.recurrent import CellType
from src.training.config import OptimizerName


def add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run configuration; flags override its values")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--workers", type=int, help="Parallel workers")


def add_seed_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed-sampling", type=int, help="Seed for sampling and splits")
    parser.add_argument("--seed-init", type=int, help="Seed for parameter initialization")
    parser.add_argument("--seed-training", type=int, help="Seed for batch order")


def add_model_options(parser: argparse.ArgumentParser, variant_switches: bool = True) -> None:
    """Architecture flags.

    variant_switches=False leaves out --cell, --attention and --feature-mode
    for commands that choose the variants themselves.
    """
    parser.add_argument("--window", type=int, help="Sequence length W")
    parser.add_argument("--stride", type=int, help="Window step")
    if variant_switches:
        parser.add_argument("--cell", choices=[c.value for c in CellType], help="Recurrent cell")
        parser.add_argument(
            "--attention", action=argparse.BooleanOptionalAction, default=None, help="Self-attention block"
        )
        parser.add_argument("--feature-mode", choices=[m.value for m in FeatureMode])
    parser.add_argument("--heads", type=int, help="Attention heads (must divide d_k)")
    parser.add_argument("--d-k", type=int, help="Attention projection width")
    parser.add_argument("--hidden-numeric", type=int)
    parser.add_argument("--hidden-categorical", type=int)
    parser.add_argument("--fc-sizes", type=int, nargs="*", help="Hidden fully connected widths")
    parser.add_argument("--pooling", choices=[p.value for p in Pooling])


def add_training_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--lr", type=float, help="Learning rate")
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--optimizer", choices=[o.value for o in OptimizerName])
    parser.add_argument("--grad-clip", type=float, help="Max global gradient norm")
    parser.add_argument("--patience", type=int, help="Early stopping patience in epochs")


def _arg(args: argparse.Namespace, name: str) -> Any:
    return getattr(args, name, None)


def overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    """Nested RunConfig override dict from parsed flags (unset flags are None)."""
    inputs = _arg(args, "input")
    return {
        "inputs": inputs,
        "input_format": _arg(args, "input_format"),
        "mapping": _arg(args, "mapping"),
        "budget": _arg(args, "budget"),
        "split_ratio": _arg(args, "split_ratio"),
        "val_ratio": _arg(args, "val_ratio"),
        "binary": _arg(args, "binary") or None,
        "out": _arg(args, "out"),
        "workers": _arg(args, "workers"),
        "seeds": {
            "sampling": _arg(args, "seed_sampling"),
            "init": _arg(args, "seed_init"),
            "training": _arg(args, "seed_training"),
        },
        "features": {
            "window": _arg(args, "window"),
            "stride": _arg(args, "stride"),
        },
        "model": {
            "cell_type": _arg(args, "cell"),
            "use_attention": _arg(args, "attention"),
            "feature_mode": _arg(args, "feature_mode"),
            "heads": _arg(args, "heads"),
            "d_k": _arg(args, "d_k"),
            "hidden_numeric": _arg(args, "hidden_numeric"),
            "hidden_categorical": _arg(args, "hidden_categorical"),
            "fc_sizes": _arg(args, "fc_sizes"),
            "pooling": _arg(args, "pooling"),
        },
        "training": {
            "epochs": _arg(args, "epochs"),
            "learning_rate": _arg(args, "lr"),
            "batch_size": _arg(args, "batch_size"),
            "optimizer": _arg(args, "optimizer"),
            "grad_clip": _arg(args, "grad_clip"),
            "early_stop_patience": _arg(args, "patience"),
        },
    }


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    return load_run_config(_arg(args, "config"), overrides_from_args(args))


def report_timestamp() -> str:
    """ECNET_FIXED_TIMESTAMP when set, otherwise the current UTC time."""
    settings = get_settings()
    if settings.has_fixed_timestamp:
        return settings.FIXED_TIMESTAMP
    return datetime.now(timezone.utc).isoformat(timespec="seconds")
