"""Scaled dot-product self-attention over recurrent hidden states.

    Attention(Q, K, V) = softmax(Q K^T / sqrt(d_k)) V

with Q = H W_q, K = H W_k, V = H W_v. With heads > 1 the d_k columns are split
into equal slices, each slice attends on its own (scaled by its own width) and
the per-head contexts are concatenated. No output projection follows.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.errors import ShapeError
from src.nn.core import Matrix, softmax_backward, softmax_rows, xavier_init

Params = dict[str, Matrix]


class Pooling(str, Enum):
    """How a W-step sequence is reduced to one vector."""
    FINAL = "final"
    MEAN = "mean"


@dataclass
class AttentionOutput:
    """Attended sequence and its attention map.

    head_weights has shape (..., heads, W, W); weights is the head average,
    which is W x W (row-stochastic) for a single sequence.
    """

    context: Matrix
    head_weights: Matrix

    @property
    def weights(self) -> Matrix:
        return self.head_weights.mean(axis=-3)


@dataclass
class AttentionCache:
    """Forward values needed by attention_backward."""

    q: Matrix
    k: Matrix
    v: Matrix
    head_weights: Matrix
    heads: int


def init_attention_params(
    input_size: int, d_k: int, rng: np.random.Generator
) -> Params:
    """Xavier-initialized W_q, W_k, W_v of shape input_size x d_k."""
    return {
        "W_q": xavier_init(input_size, d_k, rng),
        "W_k": xavier_init(input_size, d_k, rng),
        "W_v": xavier_init(input_size, d_k, rng),
    }


def project_qkv(h_states: Matrix, p: Params) -> tuple[Matrix, Matrix, Matrix]:
    """Map hidden states (..., W, H_in) to Q, K, V of shape (..., W, d_k).

    Raises:
        ShapeError: If H_in does not match the projection rows
    """
    h_states = np.asarray(h_states, dtype=np.float64)
    rows = p["W_q"].shape[0]
    if h_states.shape[-1] != rows:
        raise ShapeError(f"hidden states {h_states.shape} do not match projections {p['W_q'].shape}")
    return h_states @ p["W_q"], h_states @ p["W_k"], h_states @ p["W_v"]


def _split_heads(x: Matrix, heads: int) -> Matrix:
    # (..., W, d_k) -> (..., heads, W, d_k / heads)
    *lead, w, d = x.shape
    return np.moveaxis(x.reshape(*lead, w, heads, d // heads), -2, -3)


def _merge_heads(x: Matrix) -> Matrix:
    # (..., heads, W, d_h) -> (..., W, heads * d_h)
    x = np.moveaxis(x, -3, -2)
    *lead, w, heads, d = x.shape
    return x.reshape(*lead, w, heads * d)


def scaled_scores(q: Matrix, k: Matrix, d_k: int) -> Matrix:
    """Attention logits Q K^T / sqrt(d_k)."""
    if d_k <= 0:
        raise ShapeError("d_k must be at least 1")
    return q @ np.swapaxes(k, -1, -2) / np.sqrt(d_k)


def attention_forward(
    q: Matrix, k: Matrix, v: Matrix, d_k: int | None = None, heads: int = 1
) -> tuple[AttentionOutput, AttentionCache]:
    """Scaled dot-product attention.

    Args:
        q, k, v: Arrays of shape (..., W, d_k)
        d_k: Declared projection width; defaults to q's last axis
        heads: Number of attention heads (must divide d_k)

    Returns:
        (AttentionOutput, cache)

    Raises:
        ShapeError: If d_k is zero, shapes disagree, or heads does not divide d_k
    """
    q, k, v = (np.asarray(a, dtype=np.float64) for a in (q, k, v))
    width = q.shape[-1] if d_k is None else d_k
    if width <= 0:
        raise ShapeError("d_k must be at least 1")
    if not (q.shape == k.shape == v.shape) or q.shape[-1] != width:
        raise ShapeError(f"Q {q.shape}, K {k.shape}, V {v.shape} must share shape (..., W, {width})")
    if heads < 1 or width % heads != 0:
        raise ShapeError(f"heads={heads} must divide d_k={width}")

    qh, kh, vh = (_split_heads(a, heads) for a in (q, k, v))
    scores = scaled_scores(qh, kh, width // heads)
    weights = softmax_rows(scores)
    context = _merge_heads(weights @ vh)
    cache = AttentionCache(q=q, k=k, v=v, head_weights=weights, heads=heads)
    return AttentionOutput(context=context, head_weights=weights), cache


def attention_backward(
    cache: AttentionCache, d_context: Matrix
) -> tuple[Matrix, Matrix, Matrix]:
    """Gradients of attention_forward with respect to Q, K and V."""
    d_context = np.asarray(d_context, dtype=np.float64)
    if d_context.shape != cache.q.shape:
        raise ShapeError(f"d_context {d_context.shape} does not match context {cache.q.shape}")
    heads = cache.heads
    qh, kh, vh = (_split_heads(a, heads) for a in (cache.q, cache.k, cache.v))
    dch = _split_heads(d_context, heads)
    a = cache.head_weights
    scale = np.sqrt(cache.q.shape[-1] // heads)

    dvh = np.swapaxes(a, -1, -2) @ dch
    da = dch @ np.swapaxes(vh, -1, -2)
    ds = softmax_backward(a, da) / scale
    dqh = ds @ kh
    dkh = np.swapaxes(ds, -1, -2) @ qh
    return _merge_heads(dqh), _merge_heads(dkh), _merge_heads(dvh)


def project_qkv_backward(
    h_states: Matrix, p: Params, dq: Matrix, dk: Matrix, dv: Matrix
) -> tuple[Params, Matrix]:
    """Chain Q/K/V gradients back to the projections and the hidden states."""
    h_states = np.asarray(h_states, dtype=np.float64)
    flat_h = h_states.reshape(-1, h_states.shape[-1])
    grads = {}
    d_states = np.zeros_like(h_states)
    for name, d in (("W_q", dq), ("W_k", dk), ("W_v", dv)):
        grads[name] = flat_h.T @ d.reshape(-1, d.shape[-1])
        d_states += d @ p[name].T
    return grads, d_states


def pool_context(context: Matrix, mode: Pooling = Pooling.FINAL) -> Matrix:
    """Reduce (..., W, d) to (..., d) by final-row selection or row mean."""
    context = np.asarray(context, dtype=np.float64)
    if context.ndim < 2 or context.shape[-2] < 1:
        raise ShapeError(f"cannot pool context of shape {context.shape}")
    if Pooling(mode) is Pooling.MEAN:
        return context.mean(axis=-2)
    return context[..., -1, :].copy()


def pool_backward(d_pooled: Matrix, steps: int, mode: Pooling = Pooling.FINAL) -> Matrix:
    """Spread a pooled gradient back over the W steps."""
    d_pooled = np.asarray(d_pooled, dtype=np.float64)
    shape = d_pooled.shape[:-1] + (steps, d_pooled.shape[-1])
    if Pooling(mode) is Pooling.MEAN:
        return np.broadcast_to(d_pooled[..., None, :] / steps, shape).copy()
    out = np.zeros(shape)
    out[..., -1, :] = d_pooled
    return out
