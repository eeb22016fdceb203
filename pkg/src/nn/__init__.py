"""Hand-differentiated numeric layers: kernel, recurrent cells, attention."""

from .core import Matrix, make_rng, matmul, sigmoid, tanh_m, softmax_rows, xavier_init
from .gradcheck import grad_check, grad_check_params
from .recurrent import CellType, CellState, run_sequence, run_sequence_backward
from .attention import Pooling, AttentionOutput, attention_forward, attention_backward

__all__ = [
    "Matrix",
    "make_rng",
    "matmul",
    "sigmoid",
    "tanh_m",
    "softmax_rows",
    "xavier_init",
    "grad_check",
    "grad_check_params",
    "CellType",
    "CellState",
    "run_sequence",
    "run_sequence_backward",
    "Pooling",
    "AttentionOutput",
    "attention_forward",
    "attention_backward",
]
