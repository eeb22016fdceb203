"""gradcheck: finite-difference verification of every hand-written backward pass."""

import argparse
import logging
from typing import Callable

import numpy as np

from src.features.sequences import SequenceBatch
from src.features.synthetic import synthetic_schema
from src.flows.labels import LabelVocab
from src.model.config import ModelConfig
from src.model.ecnet import backward, build_model, forward
from src.nn.attention import attention_backward, attention_forward, init_attention_params, project_qkv, project_qkv_backward
from src.nn.core import Matrix, make_rng, softmax_rows, xavier_init
from src.nn.gradcheck import grad_check_params
from src.nn.recurrent import CellType, init_cell_params, run_sequence, run_sequence_backward
from src.training.losses import cross_entropy

logger = logging.getLogger(__name__)

TOLERANCE = 1e-4

Bundle = dict[str, Matrix]
# (loss over the bundle, analytic gradients, bundle)
Problem = tuple[Callable[[], float], Bundle, Bundle]


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("gradcheck", help="Check analytic gradients against finite differences")
    parser.add_argument("--eps", type=float, default=1e-5, help="Central-difference step")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tolerance", type=float, default=TOLERANCE)
    parser.add_argument("--inject-sign-error", action="store_true", help=argparse.SUPPRESS)
    parser.set_defaults(handler=run)


def cell_problem(cell_type: CellType, rng: np.random.Generator) -> Problem:
    """Random B=2, W=4, D=3, H=4 sequence with a random linear readout of every h_t."""
    p = init_cell_params(cell_type, 3, 4, rng)
    seq = rng.normal(size=(2, 4, 3))
    readout = rng.normal(size=(2, 4, 4))

    def loss() -> float:
        h_all, _ = run_sequence(cell_type, p, seq)
        return float(np.sum(h_all * readout))

    _, caches = run_sequence(cell_type, p, seq)
    grads, d_seq = run_sequence_backward(cell_type, p, caches, readout)
    return loss, {**grads, "input": d_seq}, {**p, "input": seq}


def attention_problem(rng: np.random.Generator) -> Problem:
    """Two-head attention with its Q/K/V projections over a B=2, W=4, width-5 state sequence."""
    p = init_attention_params(5, 4, rng)
    states = rng.normal(size=(2, 4, 5))
    readout = rng.normal(size=(2, 4, 4))

    def loss() -> float:
        q, k, v = project_qkv(states, p)
        out, _ = attention_forward(q, k, v, 4, heads=2)
        return float(np.sum(out.context * readout))

    q, k, v = project_qkv(states, p)
    _, cache = attention_forward(q, k, v, 4, heads=2)
    dq, dk, dv = attention_backward(cache, readout)
    grads, d_states = project_qkv_backward(states, p, dq, dk, dv)
    return loss, {**grads, "input": d_states}, {**p, "input": states}


def dense_problem(rng: np.random.Generator) -> Problem:
    """tanh layer, linear output, softmax and mean cross-entropy on a batch of 3."""
    p = {
        "W1": xavier_init(4, 5, rng),
        "b1": rng.normal(scale=0.1, size=4),
        "W2": xavier_init(3, 4, rng),
        "b2": rng.normal(scale=0.1, size=3),
    }
    x = rng.normal(size=(3, 5))
    targets = np.array([0, 2, 1])

    def logits() -> tuple[Matrix, Matrix]:
        hidden = np.tanh(x @ p["W1"].T + p["b1"])
        return hidden, hidden @ p["W2"].T + p["b2"]

    def loss() -> float:
        return cross_entropy(softmax_rows(logits()[1]), targets)[0]

    hidden, z = logits()
    _, d_logits = cross_entropy(softmax_rows(z), targets)
    d_hidden = (d_logits @ p["W2"]) * (1.0 - hidden ** 2)
    grads = {
        "W1": d_hidden.T @ x,
        "b1": d_hidden.sum(axis=0),
        "W2": d_logits.T @ hidden,
        "b2": d_logits.sum(axis=0),
    }
    return loss, grads, p


def ecnet_problem(rng: np.random.Generator, seed: int) -> Problem:
    """Full two-branch model with two-head attention on a 3-class batch."""
    schema = synthetic_schema(d_num=2, window=4)
    vocab = LabelVocab(names=["Benign", "Scan", "DDoS"], benign_id=0)
    config = ModelConfig(
        hidden_numeric=3, hidden_categorical=2, d_k=4, heads=2, fc_sizes=[4], n_classes=3, seed=seed,
    )
    m = build_model(config, schema, vocab)
    tokens = rng.integers(0, schema.categorical_width, size=(2, 4))
    b = SequenceBatch(
        numeric=rng.normal(size=(2, 4, 2)),
        categorical=np.eye(schema.categorical_width)[tokens],
        targets=np.array([1, 2]),
    )

    def loss() -> float:
        probs, _ = forward(m, b)
        return cross_entropy(probs, b.targets)[0]

    _, cache = forward(m, b)
    grads = backward(m, cache, targets=b.targets)
    return loss, grads, m.params


def gradient_problems(seed: int) -> dict[str, Problem]:
    rng = make_rng(seed)
    problems = {f"{cell.value} cell": cell_problem(cell, rng) for cell in CellType}
    problems["attention"] = attention_problem(rng)
    problems["fc+softmax+ce"] = dense_problem(rng)
    problems["ecnet"] = ecnet_problem(rng, seed)
    return problems


def run_gradcheck(seed: int = 0, eps: float = 1e-5, inject_sign_error: bool = False) -> dict[str, float]:
    """Max relative gradient error per component.

    With inject_sign_error the first analytic gradient of every component is
    negated, which must make every component fail.
    """
    errors = {}
    for name, (loss, grads, bundle) in gradient_problems(seed).items():
        if inject_sign_error:
            first = next(iter(grads))
            grads = {**grads, first: -grads[first]}
        per_param = grad_check_params(loss, bundle, grads, eps)
        worst = max(per_param, key=per_param.get)
        logger.debug("%s: worst parameter %s (%.3e)", name, worst, per_param[worst])
        errors[name] = per_param[worst]
    return errors


def run(args: argparse.Namespace) -> int:
    errors = run_gradcheck(args.seed, args.eps, args.inject_sign_error)
    print(f"{'component':<16} {'max rel error':>14}  result")
    for name, error in errors.items():
        print(f"{name:<16} {error:>14.3e}  {'ok' if error < args.tolerance else 'FAIL'}")
    failed = [name for name, error in errors.items() if not error < args.tolerance]
    if failed:
        print(f"gradient check failed for: {', '.join(failed)}")
        return 3
    return 0
