"""Forward pass, cross-entropy loss, and backpropagation through time.

Gradients are derived by hand and verified against central finite
differences (see gradcheck). Everything is plain numpy in the dtype of the
parameters; evaluation order is fixed, so identical inputs give bit-identical
outputs run to run.

Sequences are held time-major ([T x B x .]) internally so each timestep's
slice is one contiguous slab; the public batch interface stays [B x T x .].

Cell equations, with sigma the logistic function and (.) elementwise:

    i = sigma(W_i x + U_i h_prev + b_i)      input gate
    f = sigma(W_f x + U_f h_prev + b_f)      forget gate
    o = sigma(W_o x + U_o h_prev + b_o)      output gate
    g = tanh (W_g x + U_g h_prev + b_g)      candidate cell value
    c = f . c_prev + i . g
    h = o . tanh(c)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CacheMismatchError, NonFiniteInputError, ShapeMismatchError
from .params import Gradients, LstmLayerParams, ModelParams

LOG_FLOOR = 1e-12  # ln arguments are clamped here rather than raising


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # exact identity sigma(z) = (1 + tanh(z/2)) / 2; saturates cleanly on
    # both tails and rides numpy's vectorized tanh
    out = np.tanh(0.5 * z)
    out += 1.0
    out *= 0.5
    return out


@dataclass
class LstmState:
    """Hidden and cell state vectors of one layer at one timestep."""

    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden: int, dtype=np.float64, batch: int | None = None):
        shape = (hidden,) if batch is None else (batch, hidden)
        return cls(h=np.zeros(shape, dtype=dtype), c=np.zeros(shape, dtype=dtype))


def lstm_cell_forward(
    x_t: np.ndarray, prev: LstmState, p: LstmLayerParams
) -> LstmState:
    """One LSTM step on a single input vector (or a [B x D] batch)."""
    if x_t.shape[-1] != p.w_x.shape[1]:
        raise ShapeMismatchError(
            f"input width {x_t.shape[-1]} != layer D_in {p.w_x.shape[1]}"
        )
    if prev.h.shape[-1] != p.hidden:
        raise ShapeMismatchError(
            f"state width {prev.h.shape[-1]} != layer hidden {p.hidden}"
        )
    hidden = p.hidden
    z = x_t @ p.w_x.T + prev.h @ p.w_h.T + p.bias
    gates = _sigmoid(z[..., : 3 * hidden])
    i = gates[..., :hidden]
    f = gates[..., hidden : 2 * hidden]
    o = gates[..., 2 * hidden :]
    g = np.tanh(z[..., 3 * hidden :])
    c = f * prev.c + i * g
    h = o * np.tanh(c)
    return LstmState(h=h, c=c)


@dataclass
class _LayerCache:
    """Gate activations and state trajectories of one layer, [T x B x H] each."""

    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c: np.ndarray
    h: np.ndarray


def _gate_inputs(u: np.ndarray, p: LstmLayerParams):
    """Input-driven pre-activations, split into the contiguous sigmoid block
    [T x B x 3H] and the tanh candidate block [T x B x H]."""
    steps, batch, d_in = u.shape
    hidden = p.hidden
    flat = u.reshape(steps * batch, d_in)
    zs = flat @ p.w_x[: 3 * hidden].T
    zs += p.bias[: 3 * hidden]
    zg = flat @ p.w_x[3 * hidden :].T
    zg += p.bias[3 * hidden :]
    return zs.reshape(steps, batch, 3 * hidden), zg.reshape(steps, batch, hidden)


def _recurrent_views(p: LstmLayerParams):
    hidden = p.hidden
    return (
        np.ascontiguousarray(p.w_h[: 3 * hidden].T),  # [H x 3H]
        np.ascontiguousarray(p.w_h[3 * hidden :].T),  # [H x H]
    )


def _run_layer(u: np.ndarray, p: LstmLayerParams) -> _LayerCache:
    """Unroll one LSTM layer over a [T x B x D] input sequence."""
    steps, batch, _ = u.shape
    hidden = p.hidden
    dtype = u.dtype
    cache = _LayerCache(
        *(np.empty((steps, batch, hidden), dtype=dtype) for _ in range(6))
    )
    zx_s, zx_g = _gate_inputs(u, p)
    w_hs_t, w_hg_t = _recurrent_views(p)
    h_prev = np.zeros((batch, hidden), dtype=dtype)
    c_prev = np.zeros((batch, hidden), dtype=dtype)
    zs = np.empty((batch, 3 * hidden), dtype=dtype)
    zg = np.empty((batch, hidden), dtype=dtype)
    for t in range(steps):
        np.matmul(h_prev, w_hs_t, out=zs)
        zs += zx_s[t]
        np.matmul(h_prev, w_hg_t, out=zg)
        zg += zx_g[t]
        # sigmoid in place: (tanh(z/2) + 1) / 2
        zs *= 0.5
        np.tanh(zs, out=zs)
        zs += 1.0
        zs *= 0.5
        g = np.tanh(zg, out=zg)
        i = zs[:, :hidden]
        f = zs[:, hidden : 2 * hidden]
        o = zs[:, 2 * hidden :]
        c = f * c_prev
        c += i * g
        h = o * np.tanh(c)
        cache.i[t], cache.f[t], cache.o[t] = i, f, o
        cache.g[t], cache.c[t], cache.h[t] = g, c, h
        h_prev, c_prev = h, c
    return cache


def _run_layer_h(u: np.ndarray, p: LstmLayerParams, full: bool):
    """Inference-only unroll: no gate caching; h per step or just the last."""
    steps, batch, _ = u.shape
    hidden = p.hidden
    dtype = u.dtype
    zx_s, zx_g = _gate_inputs(u, p)
    w_hs_t, w_hg_t = _recurrent_views(p)
    h_prev = np.zeros((batch, hidden), dtype=dtype)
    c_prev = np.zeros((batch, hidden), dtype=dtype)
    h_all = np.empty((steps, batch, hidden), dtype=dtype) if full else None
    zs = np.empty((batch, 3 * hidden), dtype=dtype)
    zg = np.empty((batch, hidden), dtype=dtype)
    for t in range(steps):
        np.matmul(h_prev, w_hs_t, out=zs)
        zs += zx_s[t]
        np.matmul(h_prev, w_hg_t, out=zg)
        zg += zx_g[t]
        zs *= 0.5
        np.tanh(zs, out=zs)
        zs += 1.0
        zs *= 0.5
        g = np.tanh(zg, out=zg)
        c = zs[:, hidden : 2 * hidden] * c_prev
        c += zs[:, :hidden] * g
        h = zs[:, 2 * hidden :] * np.tanh(c)
        if full:
            h_all[t] = h
        h_prev, c_prev = h, c
    return h_all if full else h_prev


@dataclass
class ForwardCache:
    """Everything backward needs, tied to the parameters that produced it."""

    params: ModelParams
    x: np.ndarray             # [T x B x D] input batch, time-major, compute dtype
    relu_mask: np.ndarray     # [T x B x H] bool, fc pre-activation > 0
    fc_act: np.ndarray        # [T x B x H]
    lstm1: _LayerCache
    lstm2: _LayerCache
    logits: np.ndarray        # [B x C]
    probs: np.ndarray         # [B x C]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _time_major(batch: np.ndarray, p: ModelParams) -> np.ndarray:
    x = np.asarray(batch, dtype=p.dtype)
    if x.ndim != 3 or x.shape[2] != p.dims.in_features:
        raise ShapeMismatchError(
            f"batch shape {x.shape}, expected [B, T, {p.dims.in_features}]"
        )
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("batch contains NaN or infinity")
    return np.ascontiguousarray(x.transpose(1, 0, 2))


def _fc_lift(x: np.ndarray, p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    steps, batch, d_in = x.shape
    pre = x.reshape(steps * batch, d_in) @ p.fc_w.T
    pre += p.fc_b
    pre = pre.reshape(steps, batch, -1)
    mask = pre > 0
    return mask, np.where(mask, pre, 0)


def forward(batch: np.ndarray, p: ModelParams) -> tuple[np.ndarray, ForwardCache]:
    """Run the network over a [B x T x in_features] batch.

    Returns per-window class probabilities [B x C] and the cache for
    backward. Initial LSTM states are zero; only the final hidden state of
    the second layer feeds the output head.
    """
    x = _time_major(batch, p)
    mask, act = _fc_lift(x, p)
    l1 = _run_layer(act, p.lstm1)
    l2 = _run_layer(l1.h, p.lstm2)
    logits = l2.h[-1] @ p.out_w.T + p.out_b
    probs = softmax(logits)
    cache = ForwardCache(
        params=p, x=x, relu_mask=mask, fc_act=act,
        lstm1=l1, lstm2=l2, logits=logits, probs=probs,
    )
    return probs, cache


def predict_probs(batch: np.ndarray, p: ModelParams) -> np.ndarray:
    """Inference-mode probabilities: same numbers as forward, no cache kept."""
    x = _time_major(batch, p)
    _, act = _fc_lift(x, p)
    h1 = _run_layer_h(act, p.lstm1, full=True)
    h2 = _run_layer_h(h1, p.lstm2, full=False)
    return softmax(h2 @ p.out_w.T + p.out_b)


def l2_penalty(p: ModelParams, lam: float) -> float:
    """lam * sum of squared weight entries; biases are exempt."""
    if not lam:
        return 0.0
    return lam * sum(
        float(np.sum(np.square(w, dtype=np.float64))) for _, w in p.weight_tensors()
    )


def loss(
    probs: np.ndarray, targets: np.ndarray, p: ModelParams, lam: float = 0.0
) -> float:
    """Mean cross-entropy plus the L2 weight penalty."""
    if probs.shape != targets.shape:
        raise ShapeMismatchError(f"probs {probs.shape} vs targets {targets.shape}")
    clamped = np.maximum(probs, LOG_FLOOR)
    data = -np.sum(targets * np.log(clamped)) / probs.shape[0]
    return float(data) + l2_penalty(p, lam)


def _layer_backward(
    cache: _LayerCache,
    u: np.ndarray,
    dh_seq: np.ndarray,
    p: LstmLayerParams,
    gw_x: np.ndarray,
    gw_h: np.ndarray,
    gb: np.ndarray,
) -> np.ndarray:
    """BPTT through one layer; accumulates parameter grads, returns du.

    ``dh_seq`` holds the externally injected gradient on h_t per timestep
    (zero except the last step for the top layer). All sequences [T x B x .].
    """
    steps, batch, hidden = cache.h.shape
    d_in = u.shape[2]
    dtype = u.dtype
    du = np.empty_like(u)
    dh_rec = np.zeros((batch, hidden), dtype=dtype)
    dc_rec = np.zeros((batch, hidden), dtype=dtype)
    dz = np.empty((batch, 4 * hidden), dtype=dtype)
    dzi = dz[:, :hidden]
    dzf = dz[:, hidden : 2 * hidden]
    dzo = dz[:, 2 * hidden : 3 * hidden]
    dzg = dz[:, 3 * hidden :]
    w_x = np.ascontiguousarray(p.w_x)
    w_h = np.ascontiguousarray(p.w_h)
    scratch_x = np.empty_like(gw_x)
    scratch_h = np.empty_like(gw_h)
    dh = np.empty((batch, hidden), dtype=dtype)
    dc = np.empty((batch, hidden), dtype=dtype)
    tmp = np.empty((batch, hidden), dtype=dtype)
    one = dtype.type(1)
    for t in range(steps - 1, -1, -1):
        i, f, o, g = cache.i[t], cache.f[t], cache.o[t], cache.g[t]
        tanh_c = np.tanh(cache.c[t])
        np.add(dh_seq[t], dh_rec, out=dh)
        # dc collects the h -> tanh(c) path plus the recurrent carry
        np.multiply(dh, o, out=dc)
        np.multiply(tanh_c, tanh_c, out=tmp)
        np.subtract(one, tmp, out=tmp)
        dc *= tmp
        dc += dc_rec
        np.multiply(dh, tanh_c, out=dzo)
        dzo *= o
        np.subtract(one, o, out=tmp)
        dzo *= tmp
        if t > 0:
            np.multiply(dc, cache.c[t - 1], out=dzf)
            dzf *= f
            np.subtract(one, f, out=tmp)
            dzf *= tmp
        else:
            dzf[:] = 0  # c_prev is the zero initial state
        np.multiply(dc, g, out=dzi)
        dzi *= i
        np.subtract(one, i, out=tmp)
        dzi *= tmp
        np.multiply(dc, i, out=dzg)
        np.multiply(g, g, out=tmp)
        np.subtract(one, tmp, out=tmp)
        dzg *= tmp
        np.matmul(dz.T, u[t], out=scratch_x)
        gw_x += scratch_x
        if t > 0:
            np.matmul(dz.T, cache.h[t - 1], out=scratch_h)
            gw_h += scratch_h
        gb += dz.sum(axis=0)
        np.matmul(dz, w_x, out=du[t])
        dh_rec = dz @ w_h
        np.multiply(dc, f, out=dc_rec)
    return du


def backward(
    cache: ForwardCache,
    targets: np.ndarray,
    p: ModelParams,
    lam: float = 0.0,
) -> Gradients:
    """Exact gradient of loss() w.r.t. every parameter via BPTT.

    The cache must come from forward() on the same parameter object.
    """
    if cache.params is not p:
        raise CacheMismatchError("cache was produced by different parameters")
    if cache.probs.shape != targets.shape:
        raise ShapeMismatchError(
            f"targets {targets.shape} vs probs {cache.probs.shape}"
        )
    batch = cache.probs.shape[0]
    targets = np.asarray(targets, dtype=p.dtype)
    g = p.zeros_like()

    # softmax + cross-entropy collapses to probs - targets
    dlogits = (cache.probs - targets) / batch
    h2_last = cache.lstm2.h[-1]
    g.out_w += dlogits.T @ h2_last
    g.out_b += dlogits.sum(axis=0)

    dh2 = np.zeros_like(cache.lstm2.h)
    dh2[-1] = dlogits @ p.out_w
    dh1 = _layer_backward(
        cache.lstm2, cache.lstm1.h, dh2, p.lstm2,
        g.lstm2.w_x, g.lstm2.w_h, g.lstm2.bias,
    )
    da = _layer_backward(
        cache.lstm1, cache.fc_act, dh1, p.lstm1,
        g.lstm1.w_x, g.lstm1.w_h, g.lstm1.bias,
    )
    ds = np.where(cache.relu_mask, da, 0)
    hidden, d_in = p.fc_w.shape
    g.fc_w += ds.reshape(-1, hidden).T @ cache.x.reshape(-1, d_in)
    g.fc_b += ds.sum(axis=(0, 1))

    if lam:
        for (_, gw), (_, w) in zip(g.weight_tensors(), p.weight_tensors()):
            gw += (2.0 * lam) * w
    return g
