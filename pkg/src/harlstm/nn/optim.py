"""Adam (default) and plain gradient descent updates.

Updates are applied in place; the training loop owns copying semantics.
Moment tensors live in a dict keyed by the canonical tensor names so the
state serializes alongside checkpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatchError
from .params import Gradients, ModelParams

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class AdamState:
    """First/second moment estimates plus the step counter."""

    t: int
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]

    @classmethod
    def zeros(cls, params: ModelParams) -> "AdamState":
        return cls(
            t=0,
            m={n: np.zeros_like(a) for n, a in params.named_tensors()},
            v={n: np.zeros_like(a) for n, a in params.named_tensors()},
        )


def optimizer_step(
    params: ModelParams,
    grads: Gradients,
    state: AdamState,
    lr: float,
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam step; mutates params and state in place."""
    state.t += 1
    t = state.t
    corr1 = 1.0 - ADAM_BETA1 ** t
    corr2 = 1.0 - ADAM_BETA2 ** t
    for (name, theta), (gname, g) in zip(params.named_tensors(), grads.named_tensors()):
        if theta.shape != g.shape:
            raise ShapeMismatchError(f"{name}: param {theta.shape} vs grad {g.shape}")
        m, v = state.m[name], state.v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * np.square(g)
        m_hat = m / corr1
        v_hat = v / corr2
        theta -= (lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)).astype(theta.dtype)
    return params, state


def sgd_step(params: ModelParams, grads: Gradients, lr: float) -> ModelParams:
    """Plain gradient descent, kept for ablation runs."""
    for (name, theta), (_, g) in zip(params.named_tensors(), grads.named_tensors()):
        if theta.shape != g.shape:
            raise ShapeMismatchError(f"{name}: param {theta.shape} vs grad {g.shape}")
        theta -= (lr * g).astype(theta.dtype)
    return params
