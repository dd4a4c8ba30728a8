__doc__ = """
Central finite-difference gradient checks (float64).
"""

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, precision

DEFAULT_STEP = 1e-5


def numerical_gradient(
    fn: Callable[[], Tensor], tensor: Tensor, h: float = DEFAULT_STEP
) -> np.ndarray:
    """
    d fn() / d tensor by central differences, perturbing `tensor.data` in place.
    `fn` must return a scalar tensor.
    """
    grad = np.zeros_like(tensor.data, dtype=np.float64)
    flat = tensor.data.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        plus = fn().item()
        flat[i] = original - h
        minus = fn().item()
        flat[i] = original
        out[i] = (plus - minus) / (2 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-12) -> float:
    """||a - n|| / max(||a|| + ||n||, floor)"""
    if analytic.size == 0:
        return 0.0
    diff = np.linalg.norm((analytic - numeric).ravel())
    denom = max(np.linalg.norm(analytic.ravel()) + np.linalg.norm(numeric.ravel()), floor)
    return float(diff / denom)


def gradcheck(
    fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    h: float = DEFAULT_STEP,
) -> dict[int, float]:
    """
    Compare analytic gradients from `backward()` with central differences.

    Returns the relative error per input index. Must be called with float64
    tensors, typically inside `precision(np.float64)`.
    """
    for t in tensors:
        if t.dtype != np.float64:
            raise TypeError("gradcheck requires float64 tensors")
        t.zero_grad()
    with precision(np.float64):
        fn().backward()
        analytic = [
            t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in tensors
        ]
        errors = {}
        for idx, t in enumerate(tensors):
            numeric = numerical_gradient(fn, t, h)
            errors[idx] = relative_error(analytic[idx], numeric)
    return errors
