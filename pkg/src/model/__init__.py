"""EcNet model assembly, ablation switches and checkpoints."""

from .config import FeatureMode, ModelConfig
from .ecnet import EcNetModel, ForwardCache, build_model, forward, backward, predict
from .checkpoint import save_checkpoint, load_checkpoint

__all__ = [
    "FeatureMode",
    "ModelConfig",
    "EcNetModel",
    "ForwardCache",
    "build_model",
    "forward",
    "backward",
    "predict",
    "save_checkpoint",
    "load_checkpoint",
]
