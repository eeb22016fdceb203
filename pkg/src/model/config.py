"""Architecture configuration, including every ablation switch."""

from enum import Enum

from pydantic import BaseModel, Field

from src.nn.attention import Pooling
from src.nn.recurrent import CellType


class FeatureMode(str, Enum):
    """separate: one recurrent branch per channel; merged: one branch over both."""
    SEPARATE = "separate"
    MERGED = "merged"


class ModelConfig(BaseModel):
    """EcNet architecture.

    Defaults are desk-scale choices; hidden sizes and FC depth are not fixed by
    any published setting.
    """

    cell_type: CellType = CellType.LSTM
    use_attention: bool = True
    feature_mode: FeatureMode = FeatureMode.SEPARATE
    hidden_numeric: int = Field(64, ge=1)
    hidden_categorical: int = Field(32, ge=1)
    d_k: int = Field(32, ge=1)
    heads: int = Field(1, ge=1)
    fc_sizes: list[int] = Field(default_factory=lambda: [64])
    n_classes: int = Field(2, ge=2)
    pooling: Pooling = Pooling.FINAL
    seed: int = 1

    @property
    def fused_width(self) -> int:
        """Width of the per-timestep hidden sequence fed to attention or pooling."""
        return self.hidden_numeric + self.hidden_categorical

    def with_classes(self, n_classes: int) -> "ModelConfig":
        """Copy with n_classes replaced, validated like a fresh config.

        Raises:
            pydantic.ValidationError: If n_classes < 2
        """
        return ModelConfig.model_validate({**self.model_dump(), "n_classes": n_classes})

    @property
    def variant_name(self) -> str:
        attention = "attn" if self.use_attention else "noattn"
        return f"{self.cell_type.value}-{attention}-{self.feature_mode.value}"
