"""LSTM cells and layers built on the tensor graph.

Gate layout is fused: one input projection (D, 4H) and one recurrent
projection (H, 4H), column blocks ordered input, forget, candidate, output.
The forget-gate bias block is initialized to 1.0; everything else draws from
uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from .tensor import (
    Tensor,
    add,
    concat,
    matmul,
    mul,
    reverse_time,
    sigmoid,
    stack_time,
    tanh,
)


def uniform_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


@dataclass
class LSTMParams:
    wx: Tensor  # (input_size, 4*hidden)
    wh: Tensor  # (hidden, 4*hidden)
    b: Tensor  # (4*hidden,)

    @property
    def hidden(self) -> int:
        return self.wh.shape[0]

    @property
    def input_size(self) -> int:
        return self.wx.shape[0]

    def tensors(self) -> list[Tensor]:
        return [self.wx, self.wh, self.b]


def init_lstm(rng: np.random.Generator, input_size: int, hidden: int) -> LSTMParams:
    bias = np.zeros(4 * hidden)
    bias[hidden:2 * hidden] = 1.0  # forget gate open at start
    return LSTMParams(
        wx=Tensor(uniform_init(rng, (input_size, 4 * hidden), input_size), requires_grad=True),
        wh=Tensor(uniform_init(rng, (hidden, 4 * hidden), hidden), requires_grad=True),
        b=Tensor(bias, requires_grad=True),
    )


def lstm_cell(x_t: Tensor, h_prev: Tensor, c_prev: Tensor,
              params: LSTMParams) -> tuple[Tensor, Tensor]:
    """One step of the standard gate equations.

    i = sig(W)  f = sig(W)  g = tanh(W)  o = sig(W)
    c' = f*c + i*g          h' = o * tanh(c')
    """
    hidden = params.hidden
    if x_t.shape[-1] != params.input_size:
        raise ShapeError(f"lstm input width {x_t.shape} does not match "
                         f"params input size {params.input_size}")
    gates = add(add(matmul(x_t, params.wx), matmul(h_prev, params.wh)), params.b)
    i = sigmoid(gates[:, 0:hidden])
    f = sigmoid(gates[:, hidden:2 * hidden])
    g = tanh(gates[:, 2 * hidden:3 * hidden])
    o = sigmoid(gates[:, 3 * hidden:4 * hidden])
    c_t = add(mul(f, c_prev), mul(i, g))
    h_t = mul(o, tanh(c_t))
    return h_t, c_t


def lstm_layer(seq: Tensor, params: LSTMParams, direction: str = "forward") -> Tensor:
    """Run an LSTM over a (B, T, D) sequence; returns (B, T, H).

    The backward direction consumes the sequence reversed and returns its
    outputs re-reversed, so output step t always lines up with input step t.
    """
    if seq.data.ndim != 3:
        raise ShapeError(f"lstm_layer expects (B, T, D), got {seq.shape}")
    if direction not in ("forward", "backward"):
        raise ShapeError(f"direction must be forward|backward, got {direction!r}")
    if direction == "backward":
        return reverse_time(lstm_layer(reverse_time(seq), params))

    batch, steps, _ = seq.shape
    h = Tensor(np.zeros((batch, params.hidden)))
    c = Tensor(np.zeros((batch, params.hidden)))
    outputs = []
    for t in range(steps):
        h, c = lstm_cell(seq[:, t, :], h, c, params)
        outputs.append(h)
    return stack_time(outputs)


def bilstm_layer(seq: Tensor, params_fwd: LSTMParams, params_bwd: LSTMParams) -> Tensor:
    """Bidirectional LSTM: channel concat of both directions, width 2H."""
    forward = lstm_layer(seq, params_fwd, "forward")
    backward_ = lstm_layer(seq, params_bwd, "backward")
    return concat([forward, backward_], axis=2)


@dataclass
class DenseParams:
    w: Tensor  # (in, out)
    b: Tensor  # (out,)

    def tensors(self) -> list[Tensor]:
        return [self.w, self.b]


def init_dense(rng: np.random.Generator, in_size: int, out_size: int) -> DenseParams:
    return DenseParams(
        w=Tensor(uniform_init(rng, (in_size, out_size), in_size), requires_grad=True),
        b=Tensor(np.zeros(out_size), requires_grad=True),
    )


def dense(x: Tensor, params: DenseParams) -> Tensor:
    """Affine map on the last axis; works per-frame on (B, T, D) too."""
    return add(matmul(x, params.w), params.b)
