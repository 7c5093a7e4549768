"""Finite-difference verification of the analytic gradients.

The numeric side perturbs each parameter in its own dtype (so the applied
offset is exactly representable), then evaluates the loss with everything
promoted to float64. Comparing the analytic gradient against that accurate
numeric derivative isolates the error of the hand-derived backward pass from
float32 differencing noise. O(#params) forward passes; small nets only.
"""

from __future__ import annotations

import numpy as np

from .network import forward, loss
from .params import ModelParams


def _loss_at(params: ModelParams, batch: np.ndarray, targets: np.ndarray, lam: float) -> float:
    p64 = params.astype(np.float64)
    probs, _ = forward(batch.astype(np.float64), p64)
    return loss(probs, targets.astype(np.float64), p64, lam)


def numeric_gradients(
    params: ModelParams,
    batch: np.ndarray,
    targets: np.ndarray,
    lam: float,
    epsilon: float = 1e-5,
) -> dict[str, np.ndarray]:
    """Central differences of the total loss for every parameter entry."""
    grads: dict[str, np.ndarray] = {}
    for name, tensor in params.named_tensors():
        out = np.zeros(tensor.shape, dtype=np.float64)
        it = np.nditer(tensor, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = tensor[idx]
            hi = np.array(orig + epsilon, dtype=tensor.dtype)
            lo = np.array(orig - epsilon, dtype=tensor.dtype)
            tensor[idx] = hi
            up = _loss_at(params, batch, targets, lam)
            tensor[idx] = lo
            down = _loss_at(params, batch, targets, lam)
            tensor[idx] = orig
            out[idx] = (up - down) / (float(hi) - float(lo))
        grads[name] = out
    return grads


def grad_check(
    params: ModelParams,
    batch: np.ndarray,
    targets: np.ndarray,
    lam: float = 0.0,
    epsilon: float = 1e-5,
) -> float:
    """Max relative error between analytic and numeric gradients.

    Per entry: |a - n| / max(|a| + |n|, 1e-8), maximized over all parameters.
    """
    from .network import backward  # local import keeps module load cheap

    probs, cache = forward(batch.astype(params.dtype), params)
    analytic = backward(cache, targets.astype(params.dtype), params, lam)
    numeric = numeric_gradients(params, batch, targets, lam, epsilon)

    worst = 0.0
    for name, tensor in analytic.named_tensors():
        a = tensor.astype(np.float64)
        n = numeric[name]
        denom = np.maximum(np.abs(a) + np.abs(n), 1e-8)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst
