"""Training hyperparameters."""

from enum import Enum

from pydantic import BaseModel, Field


class OptimizerName(str, Enum):
    SGD = "sgd"
    ADAM = "adam"


class TrainConfig(BaseModel):
    """Optimizer and loop settings. Defaults: Adam, lr 1e-3, batch 64, 30 epochs."""

    epochs: int = Field(30, ge=1)
    batch_size: int = Field(64, ge=1)
    learning_rate: float = Field(1e-3, gt=0)
    optimizer: OptimizerName = OptimizerName.ADAM
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    adam_eps: float = Field(1e-8, gt=0)
    grad_clip: float | None = Field(None, gt=0, description="Max global L2 norm")
    early_stop_patience: int | None = Field(None, ge=1)
    seed: int = 2
