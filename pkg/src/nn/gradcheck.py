"""Finite-difference gradient checking."""

from typing import Callable

import numpy as np

from src.errors import NumericError, ShapeError
from src.nn.core import Matrix


def relative_error(analytic: Matrix, numeric: Matrix) -> float:
    """Max elementwise |a - n| / max(|a|, |n|, 1e-8)."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if analytic.shape != numeric.shape:
        raise ShapeError(f"gradient shapes differ: {analytic.shape} vs {numeric.shape}")
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def numeric_gradient(f: Callable[[], float], theta: Matrix, eps: float = 1e-5) -> Matrix:
    """Central-difference gradient of f with respect to theta.

    theta is perturbed in place and restored after each evaluation, so f may close
    over it (or over a structure that holds it).

    Raises:
        NumericError: If f returns a non-finite value at any perturbed point
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    grad = np.zeros_like(theta, dtype=np.float64)
    flat = theta.reshape(-1)
    flat_grad = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + eps
        f_plus = f()
        flat[i] = original - eps
        f_minus = f()
        flat[i] = original
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NumericError(f"non-finite objective while perturbing index {i}")
        flat_grad[i] = (f_plus - f_minus) / (2.0 * eps)
    return grad


def grad_check(
    f: Callable[[Matrix], float],
    theta: Matrix,
    analytic_grad: Matrix,
    eps: float = 1e-5,
) -> float:
    """Compare an analytic gradient against central differences.

    Args:
        f: Scalar function of a parameter vector
        theta: Point to check at (not modified)
        analytic_grad: Claimed gradient of f at theta
        eps: Perturbation step

    Returns:
        Maximum relative error over all coordinates
    """
    point = np.array(theta, dtype=np.float64, copy=True)
    numeric = numeric_gradient(lambda: f(point), point, eps)
    return relative_error(analytic_grad, numeric)


def grad_check_params(
    loss: Callable[[], float],
    params: dict[str, Matrix],
    grads: dict[str, Matrix],
    eps: float = 1e-5,
) -> dict[str, float]:
    """Gradient-check every array of a named parameter bundle.

    loss must read params each time it is called; arrays are perturbed in place.

    Returns:
        Relative error per parameter name
    """
    errors = {}
    for name, value in params.items():
        numeric = numeric_gradient(loss, value, eps)
        errors[name] = relative_error(grads[name], numeric)
    return errors
