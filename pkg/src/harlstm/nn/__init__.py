from .params import (
    GATE_ORDER,
    Gradients,
    LstmLayerParams,
    ModelDims,
    ModelParams,
    glorot_bound,
    init_params,
)
from .network import (
    ForwardCache,
    LstmState,
    backward,
    forward,
    loss,
    lstm_cell_forward,
    softmax,
)
from .gradcheck import grad_check, numeric_gradients
from .optim import AdamState, optimizer_step, sgd_step
from .checkpoint import (
    deserialize_checkpoint,
    load_checkpoint,
    save_checkpoint,
    serialize_checkpoint,
)

__all__ = [
    "GATE_ORDER",
    "Gradients",
    "LstmLayerParams",
    "ModelDims",
    "ModelParams",
    "glorot_bound",
    "init_params",
    "ForwardCache",
    "LstmState",
    "backward",
    "forward",
    "loss",
    "lstm_cell_forward",
    "softmax",
    "grad_check",
    "numeric_gradients",
    "AdamState",
    "optimizer_step",
    "sgd_step",
    "deserialize_checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "serialize_checkpoint",
]
