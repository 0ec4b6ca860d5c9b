"""Central finite-difference checks for reverse-mode gradients."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tape, Tensor


def numerical_grad(fn: Callable[[], Tensor], tensor: Tensor, h: float = 1e-5) -> np.ndarray:
    """Central differences of the scalar ``fn()`` with respect to every element of ``tensor``."""
    data = tensor.data
    grad = np.zeros_like(data)
    for idx in np.ndindex(data.shape):
        original = data[idx]
        data[idx] = original + h
        plus = fn().item()
        data[idx] = original - h
        minus = fn().item()
        data[idx] = original
        grad[idx] = (plus - minus) / (2 * h)
    return grad


FLOOR = 1e-4


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = FLOOR) -> float:
    """max_i |a_i - n_i| / max(|a_i|, |n_i|, floor).

    The floor only matters for gradients smaller than itself, which are then
    held to an absolute error of ``tolerance * floor``.
    """
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float((np.abs(analytic - numeric) / scale).max(initial=0.0))


def gradcheck(
    fn: Callable[[], Tensor],
    inputs: Sequence[Tensor],
    h: float = 1e-5,
    floor: float = FLOOR,
) -> float:
    """Return the worst relative error between tape gradients and finite differences."""
    for tensor in inputs:
        tensor.zero_grad()
    with Tape() as tape:
        loss = fn()
    tape.backward(loss)
    worst = 0.0
    for tensor in inputs:
        numeric = numerical_grad(fn, tensor, h)
        analytic = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        worst = max(worst, max_relative_error(analytic, numeric, floor))
    return worst
