"""EcNet: two recurrent branches, self-attention, fully connected head, softmax.

Data flow for a batch (B x W x D per channel):

    numeric     -> cell -> B x W x H_num --+
                                           +-> concat -> B x W x (H_num + H_cat)
    categorical -> cell -> B x W x H_cat --+
        -> attention (optional) -> pool -> [tanh FC]* -> linear -> softmax

In merged mode the two channels are concatenated first and one cell of width
H_num + H_cat runs over them. Without attention the fused hidden sequence is
pooled directly.
"""

from dataclasses import dataclass, field

import numpy as np

from src.errors import CacheConsumedError, ModelConfigError, ShapeError
from src.features.schema import FeatureSchema
from src.features.sequences import SequenceBatch, SequenceSample
from src.flows.labels import LabelVocab
from src.model.config import FeatureMode, ModelConfig
from src.nn.attention import (
    attention_backward,
    attention_forward,
    init_attention_params,
    pool_backward,
    pool_context,
    project_qkv,
    project_qkv_backward,
)
from src.nn.core import Matrix, make_rng, softmax_backward, softmax_rows, xavier_init
from src.nn.recurrent import StepCache, init_cell_params, run_sequence, run_sequence_backward

Params = dict[str, Matrix]


@dataclass
class EcNetModel:
    """Parameters plus the configuration, schema and vocabulary they were built for.

    params is a flat, ordered mapping such as "numeric.W_f", "attention.W_q",
    "fc.0.W", "out.b". The order is the checkpoint payload order.
    """

    config: ModelConfig
    schema: FeatureSchema
    vocab: LabelVocab
    params: Params

    @property
    def branches(self) -> list[str]:
        if self.config.feature_mode is FeatureMode.SEPARATE:
            return ["numeric", "categorical"]
        return ["merged"]

    def group(self, prefix: str) -> Params:
        """View of the parameters under prefix, with the prefix stripped (no copies)."""
        head = prefix + "."
        return {name[len(head):]: value for name, value in self.params.items() if name.startswith(head)}

    def parameter_count(self) -> int:
        return int(sum(value.size for value in self.params.values()))

    def copy_params(self) -> Params:
        return {name: value.copy() for name, value in self.params.items()}

    def load_params(self, params: Params) -> None:
        """Overwrite parameter values in place from another bundle."""
        for name, value in params.items():
            self.params[name][...] = value


@dataclass
class ForwardCache:
    """Intermediate values from forward, usable by exactly one backward call."""

    inputs: dict[str, Matrix]
    branch_caches: dict[str, list[StepCache]]
    fused: Matrix
    attention: object | None
    pooled_source: Matrix
    fc_inputs: list[Matrix]
    probs: Matrix
    consumed: bool = field(default=False)


def config_violations(config: ModelConfig, schema: FeatureSchema, vocab: LabelVocab) -> list[str]:
    """All reasons config cannot be built against schema and vocab."""
    violations = []
    if config.n_classes != len(vocab):
        violations.append(f"n_classes={config.n_classes} but vocabulary has {len(vocab)} classes")
    if config.use_attention and config.d_k % config.heads != 0:
        violations.append(f"heads={config.heads} does not divide d_k={config.d_k}")
    if any(width < 1 for width in config.fc_sizes):
        violations.append(f"fc_sizes must be positive, got {config.fc_sizes}")
    if schema.numeric_width < 1:
        violations.append("schema has no numeric columns")
    if schema.categorical_width < 1:
        violations.append("schema has no categorical columns")
    return violations


def build_model(
    config: ModelConfig, schema: FeatureSchema, vocab: LabelVocab, rng: np.random.Generator | None = None
) -> EcNetModel:
    """Allocate and initialize an EcNet model.

    Args:
        config: Architecture and ablation switches
        schema: Fitted feature schema (fixes the channel widths)
        vocab: Class vocabulary (fixes the output width)
        rng: Initialization generator; defaults to make_rng(config.seed)

    Returns:
        Freshly initialized model

    Raises:
        ModelConfigError: Listing every inconsistency found
    """
    violations = config_violations(config, schema, vocab)
    if violations:
        raise ModelConfigError(violations)
    rng = rng if rng is not None else make_rng(config.seed)

    params: Params = {}

    def add(prefix: str, group: Params) -> None:
        for name, value in group.items():
            params[f"{prefix}.{name}"] = value

    d_num, d_cat = schema.numeric_width, schema.categorical_width
    if config.feature_mode is FeatureMode.SEPARATE:
        add("numeric", init_cell_params(config.cell_type, d_num, config.hidden_numeric, rng))
        add("categorical", init_cell_params(config.cell_type, d_cat, config.hidden_categorical, rng))
    else:
        add("merged", init_cell_params(config.cell_type, d_num + d_cat, config.fused_width, rng))

    width = config.fused_width
    if config.use_attention:
        add("attention", init_attention_params(width, config.d_k, rng))
        width = config.d_k

    for layer, size in enumerate(config.fc_sizes):
        params[f"fc.{layer}.W"] = xavier_init(size, width, rng)
        params[f"fc.{layer}.b"] = np.zeros(size)
        width = size
    params["out.W"] = xavier_init(config.n_classes, width, rng)
    params["out.b"] = np.zeros(config.n_classes)
    return EcNetModel(config=config, schema=schema, vocab=vocab, params=params)


def _check_batch(m: EcNetModel, b: SequenceBatch) -> None:
    if b.numeric.ndim != 3 or b.numeric.shape[-1] != m.schema.numeric_width:
        raise ShapeError(f"numeric channel {b.numeric.shape} does not match D_num={m.schema.numeric_width}")
    if b.categorical.ndim != 3 or b.categorical.shape[-1] != m.schema.categorical_width:
        raise ShapeError(
            f"categorical channel {b.categorical.shape} does not match D_cat={m.schema.categorical_width}"
        )
    if b.numeric.shape[:2] != b.categorical.shape[:2]:
        raise ShapeError(f"channel shapes disagree: {b.numeric.shape} vs {b.categorical.shape}")


def forward(m: EcNetModel, b: SequenceBatch) -> tuple[Matrix, ForwardCache]:
    """Class probabilities for a batch.

    Returns:
        (B x n_classes probability rows, cache for backward)
    """
    _check_batch(m, b)
    cfg = m.config
    if cfg.feature_mode is FeatureMode.SEPARATE:
        inputs = {"numeric": b.numeric, "categorical": b.categorical}
    else:
        inputs = {"merged": np.concatenate([b.numeric, b.categorical], axis=-1)}

    branch_caches = {}
    hidden = []
    for branch, seq in inputs.items():
        h_all, caches = run_sequence(cfg.cell_type, m.group(branch), seq)
        branch_caches[branch] = caches
        hidden.append(h_all)
    fused = np.concatenate(hidden, axis=-1)

    attention_cache = None
    source = fused
    if cfg.use_attention:
        q, k, v = project_qkv(fused, m.group("attention"))
        out, attention_cache = attention_forward(q, k, v, cfg.d_k, cfg.heads)
        source = out.context

    x = pool_context(source, cfg.pooling)
    fc_inputs = [x]
    for layer in range(len(cfg.fc_sizes)):
        x = np.tanh(x @ m.params[f"fc.{layer}.W"].T + m.params[f"fc.{layer}.b"])
        fc_inputs.append(x)
    logits = x @ m.params["out.W"].T + m.params["out.b"]
    probs = softmax_rows(logits)

    cache = ForwardCache(
        inputs=inputs,
        branch_caches=branch_caches,
        fused=fused,
        attention=attention_cache,
        pooled_source=source,
        fc_inputs=fc_inputs,
        probs=probs,
    )
    return probs, cache


def backward(
    m: EcNetModel,
    cache: ForwardCache,
    targets: np.ndarray | None = None,
    d_probs: Matrix | None = None,
) -> Params:
    """Gradients of the composite model, keyed like m.params.

    Pass targets for the fused softmax + mean cross-entropy gradient
    (p - onehot) / B, or d_probs for an arbitrary upstream gradient on the
    probabilities.

    Raises:
        CacheConsumedError: If cache was already used
        ShapeError: If the upstream gradient has the wrong shape
    """
    if cache.consumed:
        raise CacheConsumedError("forward cache already consumed by a backward pass")
    cache.consumed = True
    cfg = m.config
    probs = cache.probs

    if targets is not None:
        targets = np.asarray(targets, dtype=np.int64)
        if targets.shape != (probs.shape[0],):
            raise ShapeError(f"targets shape {targets.shape} does not match batch of {probs.shape[0]}")
        d_logits = probs.copy()
        d_logits[np.arange(len(targets)), targets] -= 1.0
        d_logits /= len(targets)
    elif d_probs is not None:
        d_probs = np.asarray(d_probs, dtype=np.float64)
        if d_probs.shape != probs.shape:
            raise ShapeError(f"d_probs shape {d_probs.shape} does not match {probs.shape}")
        d_logits = softmax_backward(probs, d_probs)
    else:
        raise ValueError("backward needs targets or d_probs")

    grads: Params = {}
    x_last = cache.fc_inputs[-1]
    grads["out.W"] = d_logits.T @ x_last
    grads["out.b"] = d_logits.sum(axis=0)
    dx = d_logits @ m.params["out.W"]
    for layer in reversed(range(len(cfg.fc_sizes))):
        y = cache.fc_inputs[layer + 1]
        da = dx * (1.0 - y ** 2)
        grads[f"fc.{layer}.W"] = da.T @ cache.fc_inputs[layer]
        grads[f"fc.{layer}.b"] = da.sum(axis=0)
        dx = da @ m.params[f"fc.{layer}.W"]

    d_source = pool_backward(dx, cache.pooled_source.shape[-2], cfg.pooling)
    if cfg.use_attention:
        dq, dk, dv = attention_backward(cache.attention, d_source)
        attn_grads, d_fused = project_qkv_backward(cache.fused, m.group("attention"), dq, dk, dv)
        for name, g in attn_grads.items():
            grads[f"attention.{name}"] = g
    else:
        d_fused = d_source

    offset = 0
    for branch, caches in cache.branch_caches.items():
        group = m.group(branch)
        width = next(iter(group.values())).shape[0]
        branch_grads, _ = run_sequence_backward(
            cfg.cell_type, group, caches, d_fused[..., offset:offset + width]
        )
        offset += width
        for name, g in branch_grads.items():
            grads[f"{branch}.{name}"] = g

    return {name: grads[name] for name in m.params}


def predict(
    m: EcNetModel, samples: list[SequenceSample] | SequenceBatch, batch_size: int = 256
) -> tuple[np.ndarray, Matrix]:
    """Argmax class ids (ties go to the lower id) and probability rows."""
    if isinstance(samples, SequenceBatch):
        probs, _ = forward(m, samples)
    else:
        if not samples:
            return np.zeros(0, dtype=np.int64), np.zeros((0, m.config.n_classes))
        chunks = [
            forward(m, SequenceBatch.stack(samples[start:start + batch_size]))[0]
            for start in range(0, len(samples), batch_size)
        ]
        probs = np.concatenate(chunks, axis=0)
    return np.argmax(probs, axis=1), probs
