"""Self-contained reverse-mode autodiff: tensors, LSTM layers, optimizers."""

from .lstm import (
    DenseParams,
    LSTMParams,
    bilstm_layer,
    dense,
    init_dense,
    init_lstm,
    lstm_cell,
    lstm_layer,
    uniform_init,
)
from .optim import Optimizer, load_params, optimizer_step, save_params
from .tensor import (
    Tensor,
    absolute,
    adaptive_maxpool1d,
    add,
    backward,
    bce,
    clip,
    concat,
    conv1d,
    downsample,
    gradient_check,
    l1_norm,
    log,
    matmul,
    maxpool1d,
    mean_all,
    mse,
    mul,
    relu,
    reshape,
    reverse_time,
    sigmoid,
    slice_,
    stack_time,
    sub,
    sum_all,
    tanh,
    zero_grads,
)

__all__ = [
    "Tensor", "add", "sub", "mul", "matmul", "sigmoid", "tanh", "relu",
    "absolute", "log", "clip", "slice_", "reshape", "concat", "stack_time",
    "reverse_time", "downsample", "conv1d", "maxpool1d", "adaptive_maxpool1d",
    "sum_all", "mean_all", "mse", "bce", "l1_norm", "backward", "zero_grads",
    "gradient_check", "LSTMParams", "DenseParams", "lstm_cell", "lstm_layer",
    "bilstm_layer", "dense", "init_lstm", "init_dense", "uniform_init",
    "Optimizer", "optimizer_step", "save_params", "load_params",
]
