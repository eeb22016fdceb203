"""Recurrent cells (LSTM, vanilla RNN, GRU) with hand-derived backward passes.

Every weight matrix acts on the concatenation [h_{t-1}, x_t], so a gate
pre-activation for a batch of rows z is z @ W.T + b with W of shape H x (H + D).

LSTM step:
    f = sigmoid(W_f z + b_f)     forget gate
    i = sigmoid(W_i z + b_i)     input gate
    g = tanh(W_c z + b_c)        candidate memory
    o = sigmoid(W_o z + b_o)     output gate
    c_t = f * c_{t-1} + i * g
    h_t = o * tanh(c_t)

GRU step (update z, reset r, candidate n):
    h_t = (1 - z) * n + z * h_{t-1},  n = tanh(W_n [r * h_{t-1}, x] + b_n)

States start at zero; there is no learned initial state.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.errors import ShapeError
from src.nn.core import Matrix, as_matrix, sigmoid, tanh_m, xavier_init

Params = dict[str, Matrix]


class CellType(str, Enum):
    """Recurrent cell families available to the model."""
    LSTM = "lstm"
    RNN = "rnn"
    GRU = "gru"


# Weight name groups per cell family
GATE_NAMES = {
    CellType.LSTM: ("f", "i", "c", "o"),
    CellType.RNN: ("h",),
    CellType.GRU: ("z", "r", "n"),
}


@dataclass
class CellState:
    """Hidden (and, for LSTM, cell) state for a batch of rows."""

    h: Matrix
    c: Matrix | None = None

    @classmethod
    def zeros(cls, batch: int, hidden: int, cell_type: CellType) -> "CellState":
        h = np.zeros((batch, hidden))
        c = np.zeros((batch, hidden)) if cell_type is CellType.LSTM else None
        return cls(h=h, c=c)


@dataclass
class StepCache:
    """Activations from one forward step, consumed by the matching backward step."""

    cell_type: CellType
    z: Matrix
    h_prev: Matrix
    acts: dict[str, Matrix] = field(default_factory=dict)


def init_cell_params(
    cell_type: CellType, input_size: int, hidden_size: int, rng: np.random.Generator
) -> Params:
    """Xavier-initialized weights and zero biases for one cell.

    Args:
        cell_type: Cell family
        input_size: D, width of x_t
        hidden_size: H, width of h_t
        rng: Generator from make_rng

    Returns:
        Dict with W_<gate> (H x (H + D)) and b_<gate> (H,) per gate
    """
    params: Params = {}
    for gate in GATE_NAMES[CellType(cell_type)]:
        params[f"W_{gate}"] = xavier_init(hidden_size, hidden_size + input_size, rng)
        params[f"b_{gate}"] = np.zeros(hidden_size)
    return params


def cell_dims(cell_type: CellType, params: Params) -> tuple[int, int]:
    """Return (H, D) implied by a parameter bundle."""
    gate = GATE_NAMES[CellType(cell_type)][0]
    hidden, width = params[f"W_{gate}"].shape
    return hidden, width - hidden


def _concat(h_prev: Matrix, x: Matrix, hidden: int, inputs: int) -> Matrix:
    if h_prev.shape[-1] != hidden or x.shape[-1] != inputs or h_prev.shape[0] != x.shape[0]:
        raise ShapeError(
            f"state {h_prev.shape} / input {x.shape} do not match cell (H={hidden}, D={inputs})"
        )
    return np.concatenate([h_prev, x], axis=1)


def _affine(z: Matrix, params: Params, gate: str) -> Matrix:
    return z @ params[f"W_{gate}"].T + params[f"b_{gate}"]


def _accumulate(grads: Params, gate: str, z: Matrix, d_pre: Matrix) -> None:
    grads[f"W_{gate}"] = d_pre.T @ z
    grads[f"b_{gate}"] = d_pre.sum(axis=0)


# LSTM

def lstm_step(p: Params, s: CellState, x: Matrix) -> tuple[CellState, StepCache]:
    """One LSTM step over a batch of rows.

    Args:
        p: LSTM parameters (W_f, W_i, W_c, W_o, b_*)
        s: Previous state (h, c), each B x H
        x: Inputs, B x D (a length-D vector is treated as one row)

    Returns:
        New state and the cache needed by lstm_step_backward
    """
    hidden, inputs = cell_dims(CellType.LSTM, p)
    x = as_matrix(x)
    h_prev = as_matrix(s.h)
    c_prev = as_matrix(s.c) if s.c is not None else np.zeros_like(h_prev)
    z = _concat(h_prev, x, hidden, inputs)

    f = sigmoid(_affine(z, p, "f"))
    i = sigmoid(_affine(z, p, "i"))
    g = tanh_m(_affine(z, p, "c"))
    o = sigmoid(_affine(z, p, "o"))
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc

    cache = StepCache(
        cell_type=CellType.LSTM, z=z, h_prev=h_prev,
        acts={"f": f, "i": i, "g": g, "o": o, "c_prev": c_prev, "c": c, "tc": tc},
    )
    return CellState(h=h, c=c), cache


def lstm_step_backward(
    p: Params, cache: StepCache, dh: Matrix, dc: Matrix | None
) -> tuple[Params, Matrix, Matrix, Matrix]:
    """Reverse-mode gradients of one LSTM step.

    Args:
        p: Parameters used in the forward step
        cache: Cache returned by lstm_step
        dh: Gradient with respect to h_t
        dc: Gradient with respect to c_t (None means zero)

    Returns:
        (param grads, dh_prev, dc_prev, dx)
    """
    hidden, _ = cell_dims(CellType.LSTM, p)
    a = cache.acts
    dh = as_matrix(dh)
    if dh.shape != a["c"].shape:
        raise ShapeError(f"dh shape {dh.shape} does not match state {a['c'].shape}")
    dc = np.zeros_like(dh) if dc is None else as_matrix(dc)

    do = dh * a["tc"]
    dc_total = dc + dh * a["o"] * (1.0 - a["tc"] ** 2)
    df = dc_total * a["c_prev"]
    di = dc_total * a["g"]
    dg = dc_total * a["i"]
    dc_prev = dc_total * a["f"]

    d_pre = {
        "f": df * a["f"] * (1.0 - a["f"]),
        "i": di * a["i"] * (1.0 - a["i"]),
        "c": dg * (1.0 - a["g"] ** 2),
        "o": do * a["o"] * (1.0 - a["o"]),
    }
    grads: Params = {}
    dz = np.zeros_like(cache.z)
    for gate, d in d_pre.items():
        _accumulate(grads, gate, cache.z, d)
        dz += d @ p[f"W_{gate}"]
    return grads, dz[:, :hidden], dc_prev, dz[:, hidden:]


# Vanilla RNN

def rnn_step(p: Params, s: CellState, x: Matrix) -> tuple[CellState, StepCache]:
    """One vanilla RNN step: h_t = tanh(W_h [h_{t-1}, x] + b_h)."""
    hidden, inputs = cell_dims(CellType.RNN, p)
    x = as_matrix(x)
    h_prev = as_matrix(s.h)
    z = _concat(h_prev, x, hidden, inputs)
    h = tanh_m(_affine(z, p, "h"))
    return CellState(h=h), StepCache(cell_type=CellType.RNN, z=z, h_prev=h_prev, acts={"h": h})


def rnn_step_backward(
    p: Params, cache: StepCache, dh: Matrix, dc: Matrix | None = None
) -> tuple[Params, Matrix, None, Matrix]:
    """Reverse-mode gradients of one RNN step; dc is ignored."""
    hidden, _ = cell_dims(CellType.RNN, p)
    dh = as_matrix(dh)
    h = cache.acts["h"]
    if dh.shape != h.shape:
        raise ShapeError(f"dh shape {dh.shape} does not match state {h.shape}")
    d_pre = dh * (1.0 - h ** 2)
    grads: Params = {}
    _accumulate(grads, "h", cache.z, d_pre)
    dz = d_pre @ p["W_h"]
    return grads, dz[:, :hidden], None, dz[:, hidden:]


# GRU

def gru_step(p: Params, s: CellState, x: Matrix) -> tuple[CellState, StepCache]:
    """One GRU step with update, reset and candidate gates."""
    hidden, inputs = cell_dims(CellType.GRU, p)
    x = as_matrix(x)
    h_prev = as_matrix(s.h)
    z_in = _concat(h_prev, x, hidden, inputs)

    u = sigmoid(_affine(z_in, p, "z"))
    r = sigmoid(_affine(z_in, p, "r"))
    zr = np.concatenate([r * h_prev, x], axis=1)
    n = tanh_m(_affine(zr, p, "n"))
    h = (1.0 - u) * n + u * h_prev

    cache = StepCache(
        cell_type=CellType.GRU, z=z_in, h_prev=h_prev,
        acts={"u": u, "r": r, "n": n, "zr": zr},
    )
    return CellState(h=h), cache


def gru_step_backward(
    p: Params, cache: StepCache, dh: Matrix, dc: Matrix | None = None
) -> tuple[Params, Matrix, None, Matrix]:
    """Reverse-mode gradients of one GRU step; dc is ignored."""
    hidden, _ = cell_dims(CellType.GRU, p)
    a = cache.acts
    dh = as_matrix(dh)
    if dh.shape != a["n"].shape:
        raise ShapeError(f"dh shape {dh.shape} does not match state {a['n'].shape}")
    h_prev = cache.h_prev

    du = dh * (h_prev - a["n"])
    dn = dh * (1.0 - a["u"])
    dh_prev = dh * a["u"]

    grads: Params = {}
    dn_pre = dn * (1.0 - a["n"] ** 2)
    _accumulate(grads, "n", a["zr"], dn_pre)
    dzr = dn_pre @ p["W_n"]
    d_rh = dzr[:, :hidden]
    dx = dzr[:, hidden:].copy()
    dr = d_rh * h_prev
    dh_prev += d_rh * a["r"]

    du_pre = du * a["u"] * (1.0 - a["u"])
    dr_pre = dr * a["r"] * (1.0 - a["r"])
    _accumulate(grads, "z", cache.z, du_pre)
    _accumulate(grads, "r", cache.z, dr_pre)
    dz = du_pre @ p["W_z"] + dr_pre @ p["W_r"]
    dh_prev += dz[:, :hidden]
    dx += dz[:, hidden:]
    return grads, dh_prev, None, dx


STEP = {CellType.LSTM: lstm_step, CellType.RNN: rnn_step, CellType.GRU: gru_step}
STEP_BACKWARD = {
    CellType.LSTM: lstm_step_backward,
    CellType.RNN: rnn_step_backward,
    CellType.GRU: gru_step_backward,
}


def run_sequence(
    cell_type: CellType, p: Params, seq: Matrix
) -> tuple[Matrix, list[StepCache]]:
    """Run a cell over a sequence from a zero state.

    Args:
        cell_type: Cell family
        p: Cell parameters
        seq: W x D for one sequence or B x W x D for a batch

    Returns:
        (H_all, caches) with H_all of shape W x H (or B x W x H); row t is h_t
    """
    cell_type = CellType(cell_type)
    seq = np.asarray(seq, dtype=np.float64)
    single = seq.ndim == 2
    batch = seq[None, ...] if single else seq
    if batch.ndim != 3 or batch.shape[1] < 1:
        raise ShapeError(f"sequence must be W x D or B x W x D with W >= 1, got {seq.shape}")
    hidden, _ = cell_dims(cell_type, p)

    state = CellState.zeros(batch.shape[0], hidden, cell_type)
    step = STEP[cell_type]
    caches: list[StepCache] = []
    outputs = []
    for t in range(batch.shape[1]):
        state, cache = step(p, state, batch[:, t, :])
        caches.append(cache)
        outputs.append(state.h)
    h_all = np.stack(outputs, axis=1)
    return (h_all[0] if single else h_all), caches


def run_sequence_backward(
    cell_type: CellType, p: Params, caches: list[StepCache], d_h_all: Matrix
) -> tuple[Params, Matrix]:
    """Backpropagation through time for run_sequence.

    Args:
        cell_type: Cell family
        p: Cell parameters used in the forward run
        caches: Caches returned by run_sequence
        d_h_all: Gradient with respect to H_all (same shape)

    Returns:
        (summed param grads, gradient with respect to the input sequence)
    """
    cell_type = CellType(cell_type)
    d_h_all = np.asarray(d_h_all, dtype=np.float64)
    single = d_h_all.ndim == 2
    d_batch = d_h_all[None, ...] if single else d_h_all
    if d_batch.shape[1] != len(caches):
        raise ShapeError(f"gradient has {d_batch.shape[1]} steps, forward ran {len(caches)}")
    step_backward = STEP_BACKWARD[cell_type]

    grads = {name: np.zeros_like(value) for name, value in p.items()}
    dh_next = np.zeros_like(d_batch[:, 0, :])
    dc_next = np.zeros_like(dh_next) if cell_type is CellType.LSTM else None
    dxs = []
    for t in reversed(range(len(caches))):
        step_grads, dh_next, dc_next, dx = step_backward(
            p, caches[t], d_batch[:, t, :] + dh_next, dc_next
        )
        for name, g in step_grads.items():
            grads[name] += g
        dxs.append(dx)
    d_seq = np.stack(dxs[::-1], axis=1)
    return grads, (d_seq[0] if single else d_seq)
