"""Dense float64 kernel shared by every differentiable layer.

Matrices are NumPy float64 arrays. Functions accept leading batch axes where
that is natural: the last two axes are (rows, cols).
"""

import numpy as np
import numpy.typing as npt

from src.errors import ShapeError

Matrix = npt.NDArray[np.float64]


def make_rng(seed: int) -> np.random.Generator:
    """Create the project's deterministic generator.

    PCG64 produces the same stream for a given seed on every platform.

    Args:
        seed: Non-negative integer seed

    Returns:
        A NumPy Generator backed by PCG64
    """
    return np.random.Generator(np.random.PCG64(seed))


def as_matrix(x) -> Matrix:
    """Convert array-like input to a float64 array with at least two axes."""
    return np.atleast_2d(np.asarray(x, dtype=np.float64))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product with an explicit shape check.

    Args:
        a: Left operand (..., n, k)
        b: Right operand (..., k, m)

    Returns:
        Product of shape (..., n, m)

    Raises:
        ShapeError: If inner dimensions disagree
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return np.matmul(a, b)


def sigmoid(x: Matrix) -> Matrix:
    """Logistic function, stable for large |x|.

    Each branch only exponentiates non-positive values, so nothing overflows.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh_m(x: Matrix) -> Matrix:
    """Elementwise hyperbolic tangent."""
    return np.tanh(np.asarray(x, dtype=np.float64))


def softmax_rows(x: Matrix) -> Matrix:
    """Softmax over the last axis with per-row max subtraction."""
    x = np.asarray(x, dtype=np.float64)
    shifted = x - np.max(x, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def softmax_backward(probs: Matrix, d_probs: Matrix) -> Matrix:
    """Gradient through softmax_rows given upstream gradient on its output."""
    inner = np.sum(d_probs * probs, axis=-1, keepdims=True)
    return probs * (d_probs - inner)


def xavier_init(rows: int, cols: int, rng: np.random.Generator) -> Matrix:
    """Glorot-uniform initialization on the interval ±sqrt(6 / (rows + cols)).

    Args:
        rows: Number of rows (>= 1)
        cols: Number of columns (>= 1)
        rng: Generator from make_rng

    Returns:
        A rows x cols matrix

    Raises:
        ShapeError: If either dimension is below 1
    """
    if rows < 1 or cols < 1:
        raise ShapeError(f"xavier_init needs positive dimensions, got ({rows}, {cols})")
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def check_shape(name: str, array: Matrix, expected: tuple[int, ...]) -> None:
    """Raise ShapeError unless array.shape equals expected."""
    if tuple(array.shape) != tuple(expected):
        raise ShapeError(f"{name}: expected shape {tuple(expected)}, got {tuple(array.shape)}")
