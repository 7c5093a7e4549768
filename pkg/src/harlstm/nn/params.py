"""Parameter containers and initialization for the classifier.

Architecture: per-timestep fully-connected ReLU lift of the 3 acceleration
channels, two stacked LSTM layers, and a linear head on the final hidden
state. Gate matrices are stored stacked in (input, forget, candidate,
output) order so one matmul per timestep covers all four gates; per-gate
views are exposed as properties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatchError


@dataclass(frozen=True)
class ModelDims:
    in_features: int = 3
    hidden: int = 64
    classes: int = 2

    def __post_init__(self):
        if min(self.in_features, self.hidden) < 1 or self.classes < 2:
            raise ShapeMismatchError(f"invalid dims {self}")


# sigmoid gates first so one activation call covers a contiguous block
GATE_ORDER = ("i", "f", "o", "g")


@dataclass
class LstmLayerParams:
    """One LSTM layer: stacked gate weights over inputs and recurrence.

    ``w_x`` is [4H x D_in], ``w_h`` [4H x H], ``bias`` [4H]; rows are grouped
    by gate in GATE_ORDER (the three sigmoid gates, then the tanh candidate).
    """

    w_x: np.ndarray
    w_h: np.ndarray
    bias: np.ndarray

    @property
    def hidden(self) -> int:
        return self.w_h.shape[1]

    def _gate(self, arr: np.ndarray, gate: str) -> np.ndarray:
        k = GATE_ORDER.index(gate)
        h = self.hidden
        return arr[k * h : (k + 1) * h]

    # per-gate views (zero-copy slices of the stacked arrays)
    @property
    def w_i(self) -> np.ndarray: return self._gate(self.w_x, "i")
    @property
    def w_f(self) -> np.ndarray: return self._gate(self.w_x, "f")
    @property
    def w_g(self) -> np.ndarray: return self._gate(self.w_x, "g")
    @property
    def w_o(self) -> np.ndarray: return self._gate(self.w_x, "o")
    @property
    def u_i(self) -> np.ndarray: return self._gate(self.w_h, "i")
    @property
    def u_f(self) -> np.ndarray: return self._gate(self.w_h, "f")
    @property
    def u_g(self) -> np.ndarray: return self._gate(self.w_h, "g")
    @property
    def u_o(self) -> np.ndarray: return self._gate(self.w_h, "o")
    @property
    def b_i(self) -> np.ndarray: return self._gate(self.bias, "i")
    @property
    def b_f(self) -> np.ndarray: return self._gate(self.bias, "f")
    @property
    def b_g(self) -> np.ndarray: return self._gate(self.bias, "g")
    @property
    def b_o(self) -> np.ndarray: return self._gate(self.bias, "o")


@dataclass
class ModelParams:
    """All weights and biases of the FC -> LSTM -> LSTM -> head network."""

    dims: ModelDims
    fc_w: np.ndarray       # [H x in_features]
    fc_b: np.ndarray       # [H]
    lstm1: LstmLayerParams
    lstm2: LstmLayerParams
    out_w: np.ndarray      # [C x H]
    out_b: np.ndarray      # [C]

    @property
    def dtype(self) -> np.dtype:
        return self.fc_w.dtype

    def named_tensors(self) -> list[tuple[str, np.ndarray]]:
        """All tensors in a fixed canonical order."""
        return [
            ("fc.w", self.fc_w),
            ("fc.b", self.fc_b),
            ("lstm1.w_x", self.lstm1.w_x),
            ("lstm1.w_h", self.lstm1.w_h),
            ("lstm1.bias", self.lstm1.bias),
            ("lstm2.w_x", self.lstm2.w_x),
            ("lstm2.w_h", self.lstm2.w_h),
            ("lstm2.bias", self.lstm2.bias),
            ("out.w", self.out_w),
            ("out.b", self.out_b),
        ]

    def weight_tensors(self) -> list[tuple[str, np.ndarray]]:
        """Weights only; these carry the L2 penalty, biases do not."""
        return [(n, t) for n, t in self.named_tensors() if not n.endswith(("b", "bias"))]

    def num_params(self) -> int:
        return sum(t.size for _, t in self.named_tensors())

    def copy(self) -> "ModelParams":
        return _rebuild(self.dims, {n: t.copy() for n, t in self.named_tensors()})

    def astype(self, dtype) -> "ModelParams":
        return _rebuild(
            self.dims, {n: t.astype(dtype) for n, t in self.named_tensors()}
        )

    def zeros_like(self) -> "ModelParams":
        return _rebuild(
            self.dims, {n: np.zeros_like(t) for n, t in self.named_tensors()}
        )

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(t)) for _, t in self.named_tensors())


# Gradients share the exact shape tree of the parameters.
Gradients = ModelParams


def _rebuild(dims: ModelDims, tensors: dict[str, np.ndarray]) -> ModelParams:
    return ModelParams(
        dims=dims,
        fc_w=tensors["fc.w"],
        fc_b=tensors["fc.b"],
        lstm1=LstmLayerParams(
            tensors["lstm1.w_x"], tensors["lstm1.w_h"], tensors["lstm1.bias"]
        ),
        lstm2=LstmLayerParams(
            tensors["lstm2.w_x"], tensors["lstm2.w_h"], tensors["lstm2.bias"]
        ),
        out_w=tensors["out.w"],
        out_b=tensors["out.b"],
    )


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_params(
    seed: int, dims: ModelDims = ModelDims(), dtype=np.float32
) -> ModelParams:
    """Seeded uniform Glorot weights; zero biases except forget gates at 1."""
    rng = np.random.default_rng(seed)
    h, d, c = dims.hidden, dims.in_features, dims.classes

    def uniform(shape, fan_in, fan_out):
        bound = glorot_bound(fan_in, fan_out)
        return rng.uniform(-bound, bound, size=shape).astype(dtype)

    def lstm_layer(d_in):
        bias = np.zeros(4 * h, dtype=dtype)
        bias[h : 2 * h] = 1.0  # forget gate
        return LstmLayerParams(
            w_x=uniform((4 * h, d_in), d_in, h),
            w_h=uniform((4 * h, h), h, h),
            bias=bias,
        )

    return ModelParams(
        dims=dims,
        fc_w=uniform((h, d), d, h),
        fc_b=np.zeros(h, dtype=dtype),
        lstm1=lstm_layer(h),
        lstm2=lstm_layer(h),
        out_w=uniform((c, h), h, c),
        out_b=np.zeros(c, dtype=dtype),
    )
