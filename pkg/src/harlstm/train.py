"""Training loop: seeded reshuffles, Adam steps, per-epoch history.

The loop is deterministic for a fixed config: epoch shuffles derive from
(seed, epoch), parameter init from the seed alone, and all numerics run in
a fixed order. History rows are measured in inference mode after the last
step of each epoch; the reported loss is the full objective (cross-entropy
plus the L2 penalty) on both splits.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergedLossError, EmptySplitError, ShapeMismatchError
from .nn import (
    AdamState,
    ModelDims,
    ModelParams,
    backward,
    forward,
    init_params,
    loss,
    optimizer_step,
    sgd_step,
)
from .nn.network import l2_penalty, predict_probs
from .nn.checkpoint import load_checkpoint, save_checkpoint  # noqa: F401  (re-export)
from .windows import SplitPair, WindowedDataset

PRECISIONS = {"float32": np.float32, "float64": np.float64, "32": np.float32, "64": np.float64}


@dataclass(frozen=True)
class TrainConfig:
    window_size: int = 150
    step: int = 10
    learning_rate: float = 0.0025
    epochs: int = 50
    batch_size: int = 1024
    lam: float = 0.0015
    seed: int = 0
    precision: str = "float32"
    hidden: int = 64
    optimizer: str = "adam"          # "adam" or "sgd"
    clip_norm: float | None = None   # off unless explicitly set

    def __post_init__(self):
        if self.window_size < self.step or self.step <= 0:
            raise ValueError(f"need 0 < step <= window size, got {self}")
        if self.learning_rate < 0 or self.epochs < 0 or self.batch_size <= 0:
            raise ValueError(f"non-positive training parameter in {self}")
        if self.lam < 0:
            raise ValueError("negative L2 coefficient")
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {sorted(PRECISIONS)}")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    @property
    def np_dtype(self):
        return PRECISIONS[self.precision]


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    test_loss: list[float] = field(default_factory=list)
    test_acc: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.train_loss)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,train_acc,test_loss,test_acc,seconds"]
        for e in range(len(self)):
            lines.append(
                f"{e},{self.train_loss[e]!r},{self.train_acc[e]!r},"
                f"{self.test_loss[e]!r},{self.test_acc[e]!r},{self.seconds[e]:.3f}"
            )
        return "\n".join(lines) + "\n"


def _forward_chunks(params: ModelParams, values: np.ndarray, batch_size: int):
    for start in range(0, len(values), batch_size):
        chunk = values[start : start + batch_size]
        yield start, predict_probs(chunk, params)


def evaluate(
    params: ModelParams, ds: WindowedDataset, lam: float = 0.0, batch_size: int = 1024
) -> tuple[float, float]:
    """(objective loss, accuracy) of the model on a dataset."""
    values = np.asarray(ds.values, dtype=params.dtype)
    targets = np.asarray(ds.targets, dtype=params.dtype)
    total_nll = 0.0
    correct = 0
    for start, probs in _forward_chunks(params, values, batch_size):
        n = probs.shape[0]
        total_nll += loss(probs, targets[start : start + n], params, 0.0) * n
        correct += int(np.count_nonzero(np.argmax(probs, axis=1) == ds.labels[start : start + n]))
    return total_nll / len(ds) + l2_penalty(params, lam), correct / len(ds)


def predict(params: ModelParams, ds: WindowedDataset, batch_size: int = 1024) -> np.ndarray:
    """Argmax class index per window; ties resolve to the lower index."""
    if params.dims.classes != len(ds.class_map):
        raise ShapeMismatchError(
            f"model has {params.dims.classes} classes, dataset {len(ds.class_map)}"
        )
    out = np.empty(len(ds), dtype=np.int64)
    values = ds.values.astype(params.dtype)
    for start, probs in _forward_chunks(params, values, batch_size):
        out[start : start + probs.shape[0]] = np.argmax(probs, axis=1)
    return out


def _clip_gradients(grads, max_norm: float) -> None:
    total = np.sqrt(
        sum(float(np.sum(np.square(g, dtype=np.float64))) for _, g in grads.named_tensors())
    )
    if total > max_norm:
        scale = max_norm / total
        for _, g in grads.named_tensors():
            g *= scale


def train(split: SplitPair, cfg: TrainConfig) -> tuple[ModelParams, TrainHistory]:
    """Run the full training procedure over a train/test split.

    Every epoch reshuffles the training windows with a seed derived from
    (cfg.seed, epoch), walks them in batches of cfg.batch_size (the final
    partial batch is trained on), and appends one history row measured on
    both splits. A non-finite loss aborts with DivergedLossError carrying
    the last epoch's parameters.
    """
    if len(split.train) == 0 or len(split.test) == 0:
        raise EmptySplitError("both train and test must be non-empty")
    dtype = cfg.np_dtype
    dims = ModelDims(
        in_features=split.train.values.shape[2],
        hidden=cfg.hidden,
        classes=len(split.train.class_map),
    )
    params = init_params(cfg.seed, dims, dtype=dtype)
    state = AdamState.zeros(params)
    history = TrainHistory()

    train_values = np.asarray(split.train.values, dtype=dtype)
    train_targets = np.asarray(split.train.targets, dtype=dtype)
    last_good = params.copy()

    for epoch in range(cfg.epochs):
        tic = time.perf_counter()
        order = np.random.default_rng([cfg.seed, epoch]).permutation(len(split.train))
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch = train_values[idx]
            targets = train_targets[idx]
            probs, cache = forward(batch, params)
            step_loss = loss(probs, targets, params, cfg.lam)
            if not np.isfinite(step_loss):
                raise DivergedLossError(
                    f"non-finite loss at epoch {epoch}", params=last_good, history=history
                )
            grads = backward(cache, targets, params, cfg.lam)
            if cfg.clip_norm is not None:
                _clip_gradients(grads, cfg.clip_norm)
            if cfg.optimizer == "adam":
                optimizer_step(params, grads, state, cfg.learning_rate)
            else:
                sgd_step(params, grads, cfg.learning_rate)

        tr_loss, tr_acc = evaluate(params, split.train, cfg.lam, cfg.batch_size)
        te_loss, te_acc = evaluate(params, split.test, cfg.lam, cfg.batch_size)
        if not (np.isfinite(tr_loss) and np.isfinite(te_loss)):
            raise DivergedLossError(
                f"non-finite epoch loss at epoch {epoch}", params=last_good, history=history
            )
        history.train_loss.append(tr_loss)
        history.train_acc.append(tr_acc)
        history.test_loss.append(te_loss)
        history.test_acc.append(te_acc)
        history.seconds.append(time.perf_counter() - tic)
        last_good = params.copy()

    return params, history
