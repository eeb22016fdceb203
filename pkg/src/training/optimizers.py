"""First-order optimizers over named parameter bundles (updated in place)."""

from dataclasses import dataclass, field

import numpy as np

from src.errors import NumericError, ShapeError
from src.nn.core import Matrix
from src.training.config import OptimizerName, TrainConfig

Params = dict[str, Matrix]


@dataclass
class OptimizerState:
    """Step counter plus Adam first/second moment estimates per parameter."""

    step: int = 0
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)


def global_norm(grads: Params) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_by_global_norm(grads: Params, max_norm: float) -> Params:
    """Scale all gradients by max_norm / norm when the global norm exceeds max_norm."""
    norm = global_norm(grads)
    if norm <= max_norm:
        return grads
    scale = max_norm / norm
    return {name: g * scale for name, g in grads.items()}


def optimizer_step(
    params: Params, grads: Params, state: OptimizerState, config: TrainConfig
) -> OptimizerState:
    """Apply one SGD or Adam update to params in place.

    Args:
        params: Parameters to update
        grads: Gradients with the same keys and shapes
        state: Optimizer state from the previous step
        config: Learning rate, optimizer choice, betas, clipping

    Returns:
        The advanced state

    Raises:
        NumericError: If any gradient block contains a non-finite value
        ShapeError: If a gradient does not match its parameter
    """
    for name, value in params.items():
        g = grads[name]
        if g.shape != value.shape:
            raise ShapeError(f"gradient for {name} has shape {g.shape}, parameter has {value.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in parameter block {name!r}")

    if config.grad_clip is not None:
        grads = clip_by_global_norm(grads, config.grad_clip)

    state.step += 1
    lr = config.learning_rate
    if config.optimizer is OptimizerName.SGD:
        for name, value in params.items():
            value -= lr * grads[name]
        return state

    b1, b2 = config.beta1, config.beta2
    for name, value in params.items():
        g = grads[name]
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(value)
            v = np.zeros_like(value)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[name], state.v[name] = m, v
        m_hat = m / (1.0 - b1 ** state.step)
        v_hat = v / (1.0 - b2 ** state.step)
        value -= lr * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    return state
