"""Pydantic models for run configuration shared by every command."""

import json
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator

from src.config import get_settings
from src.features.schema import FeatureConfig
from src.model.config import ModelConfig
from src.training.config import TrainConfig


class InputFormat(str, Enum):
    """Layout of ingest inputs."""
    ZEEK = "zeek"
    FLOW_CSV = "flow-csv"


class Seeds(BaseModel):
    """The three independent sources of randomness."""

    sampling: int = Field(default_factory=lambda: get_settings().SEED_SAMPLING, description="Sampling and splits")
    init: int = Field(default_factory=lambda: get_settings().SEED_INIT, description="Parameter initialization")
    training: int = Field(default_factory=lambda: get_settings().SEED_TRAINING, description="Batch order")


class RunConfig(BaseModel):
    """Effective configuration of one command invocation.

    Built from an optional JSON config file, then overridden by CLI flags.
    The seeds here are authoritative: model.seed and training.seed are kept in
    sync with them.
    """

    inputs: list[str] = Field(default_factory=list, description="Input files (Zeek logs, flow CSVs or canonical CSV)")
    input_format: InputFormat = InputFormat.ZEEK
    mapping: str | None = Field(None, description="Flow CSV mapping preset or JSON file")
    budget: int | None = Field(None, ge=1, description="Stratified sampling budget")
    split_ratio: float = Field(0.8, gt=0, lt=1, description="Train fraction of the train/test split")
    val_ratio: float = Field(0.1, ge=0, lt=1, description="Validation fraction carved from train")
    binary: bool = False
    seeds: Seeds = Field(default_factory=Seeds)
    features: FeatureConfig = Field(default_factory=FeatureConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    training: TrainConfig = Field(default_factory=TrainConfig)
    out: str = Field(default_factory=lambda: get_settings().OUTPUT_DIR)
    workers: int = Field(default_factory=lambda: get_settings().WORKERS, ge=1)

    @field_validator("inputs")
    @classmethod
    def _inputs_exist(cls, paths: list[str]) -> list[str]:
        missing = [p for p in paths if not Path(p).exists()]
        if missing:
            raise ValueError(f"input path(s) not found: {', '.join(missing)}")
        return paths

    @model_validator(mode="after")
    def _mapping_for_flow_csv(self) -> "RunConfig":
        if self.input_format is InputFormat.FLOW_CSV and self.mapping is None:
            raise ValueError("flow-csv input needs a mapping")
        return self

    @model_validator(mode="after")
    def _sync_seeds(self) -> "RunConfig":
        self.model.seed = self.seeds.init
        self.training.seed = self.seeds.training
        return self

    def output_dir(self) -> Path:
        """Create (if needed) and return the output directory.

        Raises:
            OSError: If the directory cannot be created or written
        """
        out = Path(self.out)
        out.mkdir(parents=True, exist_ok=True)
        check = out / ".write-test"
        check.touch()
        check.unlink()
        return out

    def echo(self) -> dict[str, Any]:
        """Config written into artifacts: location-independent, so reruns elsewhere match."""
        echo = self.model_dump(mode="json", exclude={"out", "workers"})
        echo["inputs"] = [Path(p).name for p in self.inputs]
        if self.mapping is not None:
            echo["mapping"] = Path(self.mapping).name
        return echo


def _merge(base: dict, overrides: dict) -> dict:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(path: str | Path | None, overrides: dict[str, Any]) -> RunConfig:
    """Merge a JSON config file with flag overrides and validate.

    Args:
        path: JSON file shaped like RunConfig, or None
        overrides: Nested dict of flag values; None values are ignored

    Raises:
        FileNotFoundError: If path is given but missing
        pydantic.ValidationError: If the merged values are invalid
    """
    base: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        base = json.loads(path.read_text(encoding="utf-8"))
    return RunConfig.model_validate(_merge(base, _drop_none(overrides)))


def _drop_none(values: dict[str, Any]) -> dict[str, Any]:
    cleaned = {}
    for key, value in values.items():
        if isinstance(value, dict):
            value = _drop_none(value)
            if not value:
                continue
        if value is not None:
            cleaned[key] = value
    return cleaned
