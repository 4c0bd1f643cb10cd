"""Reverse-mode automatic differentiation over dense float64 tensors.

The recorded graph doubles as the tape: every op output keeps references to
its parent tensors and a backward closure.  ``backward`` topologically sorts
the graph reachable from the loss and replays the closures in exact reverse
order, accumulating gradients into every tensor that requires them.

Sequences are laid out time-major with a leading batch axis, (batch, time,
channels); the 1-D ops (conv, pooling, downsampling) act along the time axis.
All data is float64: the networks here are tiny and gradient-check fidelity
matters more than speed.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericsError, ParameterError, ShapeError, TapeError


def _check_finite(data: np.ndarray, op: str) -> np.ndarray:
    if not np.isfinite(data).all():
        raise NumericsError(f"{op} produced non-finite values")
    return data


class Tensor:
    """An n-dimensional float64 array participating in differentiation."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn",
                 "_backward_ran")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        _check_finite(self.data, "tensor construction")
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward_fn = None
        self._backward_ran = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def _tracked(self) -> bool:
        # grads must flow through this tensor (a leaf that wants them, or an
        # op output connected to one)
        return self.requires_grad or bool(self._parents)

    def _accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def backward(self) -> None:
        backward(self)

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # operator sugar; constants are lifted automatically
    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __neg__(self):
        return mul(self, _lift(-1.0))

    def __matmul__(self, other):
        return matmul(self, _lift(other))

    def __getitem__(self, key):
        return slice_(self, key)


def _lift(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _make(data: np.ndarray, op: str, parents: tuple[Tensor, ...], backward_fn) -> Tensor:
    """Wire an op output into the graph (only when a parent is tracked)."""
    out = Tensor(_check_finite(data, op))
    tracked = tuple(p for p in parents if p._tracked)
    if tracked:
        out._parents = tracked
        out._backward_fn = backward_fn
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcasted gradient back to the operand's shape."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# ---------------------------------------------------------------------------
# elementwise and linear algebra
# ---------------------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data + b.data

    def backward_fn(g):
        if a._tracked:
            a._accumulate(_unbroadcast(g, a.shape))
        if b._tracked:
            b._accumulate(_unbroadcast(g, b.shape))

    return _make(out_data, "add", (a, b), backward_fn)


def sub(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data - b.data

    def backward_fn(g):
        if a._tracked:
            a._accumulate(_unbroadcast(g, a.shape))
        if b._tracked:
            b._accumulate(_unbroadcast(-g, b.shape))

    return _make(out_data, "sub", (a, b), backward_fn)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data * b.data

    def backward_fn(g):
        if a._tracked:
            a._accumulate(_unbroadcast(g * b.data, a.shape))
        if b._tracked:
            b._accumulate(_unbroadcast(g * a.data, b.shape))

    return _make(out_data, "mul", (a, b), backward_fn)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product; either operand may carry leading batch axes."""
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeError(f"matmul needs >=2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dims differ: {a.shape} @ {b.shape}")
    out_data = np.matmul(a.data, b.data)

    def backward_fn(g):
        if a._tracked:
            ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
            a._accumulate(_unbroadcast(ga, a.shape))
        if b._tracked:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
            b._accumulate(_unbroadcast(gb, b.shape))

    return _make(out_data, "matmul", (a, b), backward_fn)


def sigmoid(x: Tensor) -> Tensor:
    d = x.data
    out_data = np.empty_like(d)
    pos = d >= 0
    out_data[pos] = 1.0 / (1.0 + np.exp(-d[pos]))
    ex = np.exp(d[~pos])
    out_data[~pos] = ex / (1.0 + ex)

    def backward_fn(g):
        x._accumulate(g * out_data * (1.0 - out_data))

    return _make(out_data, "sigmoid", (x,), backward_fn)


def tanh(x: Tensor) -> Tensor:
    out_data = np.tanh(x.data)

    def backward_fn(g):
        x._accumulate(g * (1.0 - out_data * out_data))

    return _make(out_data, "tanh", (x,), backward_fn)


def relu(x: Tensor) -> Tensor:
    out_data = np.maximum(x.data, 0.0)

    def backward_fn(g):
        x._accumulate(g * (x.data > 0))

    return _make(out_data, "relu", (x,), backward_fn)


def absolute(x: Tensor) -> Tensor:
    out_data = np.abs(x.data)

    def backward_fn(g):
        x._accumulate(g * np.sign(x.data))

    return _make(out_data, "abs", (x,), backward_fn)


def log(x: Tensor) -> Tensor:
    with np.errstate(invalid="ignore", divide="ignore"):
        out_data = np.log(x.data)

    def backward_fn(g):
        x._accumulate(g / x.data)

    return _make(out_data, "log", (x,), backward_fn)


def clip(x: Tensor, low: float, high: float) -> Tensor:
    """Clamp values; gradient passes only through the un-clamped interior."""
    out_data = np.clip(x.data, low, high)

    def backward_fn(g):
        x._accumulate(g * ((x.data > low) & (x.data < high)))

    return _make(out_data, "clip", (x,), backward_fn)


# ---------------------------------------------------------------------------
# shape manipulation
# ---------------------------------------------------------------------------

def slice_(x: Tensor, key) -> Tensor:
    """Basic (non-fancy) indexing; the backward scatters into the sliced region."""
    out_data = x.data[key]

    def backward_fn(g):
        gx = np.zeros_like(x.data)
        gx[key] += g
        x._accumulate(gx)

    return _make(out_data, "slice", (x,), backward_fn)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    out_data = x.data.reshape(shape)

    def backward_fn(g):
        x._accumulate(g.reshape(x.shape))

    return _make(out_data, "reshape", (x,), backward_fn)


def concat(tensors: list[Tensor], axis: int) -> Tensor:
    if not tensors:
        raise ParameterError("concat needs at least one tensor")
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward_fn(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            if t._tracked:
                t._accumulate(piece)

    return _make(out_data, "concat", tuple(tensors), backward_fn)


def stack_time(tensors: list[Tensor]) -> Tensor:
    """Stack per-step (B, H) outputs into a (B, T, H) sequence."""
    steps = [reshape(t, (t.shape[0], 1, t.shape[1])) for t in tensors]
    return concat(steps, axis=1)


def _time_axis(x: Tensor) -> int:
    if x.data.ndim == 3:
        return 1
    if x.data.ndim == 2:
        return 0
    raise ShapeError(f"expected a 2-D or 3-D sequence tensor, got shape {x.shape}")


def reverse_time(x: Tensor) -> Tensor:
    axis = _time_axis(x)
    out_data = np.flip(x.data, axis=axis).copy()

    def backward_fn(g):
        x._accumulate(np.flip(g, axis=axis))

    return _make(out_data, "reverse_time", (x,), backward_fn)


def downsample(x: Tensor, stride: int) -> Tensor:
    """Keep time indices 0, stride, 2*stride, ..."""
    if stride < 1:
        raise ParameterError(f"stride must be positive, got {stride}")
    axis = _time_axis(x)
    key = (slice(None),) * axis + (slice(None, None, stride),)
    return slice_(x, key)


# ---------------------------------------------------------------------------
# 1-D convolution and pooling (time axis of (B, T, C))
# ---------------------------------------------------------------------------

def conv1d(x: Tensor, w: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """1-D convolution along time.

    x: (B, T, C_in), w: (k, C_in, C_out); output (B, T_out, C_out) with
    T_out = (T + 2*padding - k) // stride + 1.
    """
    if x.data.ndim != 3 or w.data.ndim != 3:
        raise ShapeError(f"conv1d expects x (B,T,Cin) and w (k,Cin,Cout), "
                         f"got {x.shape} and {w.shape}")
    k, c_in, _ = w.shape
    if x.shape[2] != c_in:
        raise ShapeError(f"conv1d channel mismatch: x {x.shape} vs w {w.shape}")
    t = x.shape[1]
    t_out = (t + 2 * padding - k) // stride + 1
    if t_out < 1:
        raise ShapeError(f"conv1d output length would be {t_out} "
                         f"(T={t}, k={k}, stride={stride}, padding={padding})")
    xp = np.pad(x.data, ((0, 0), (padding, padding), (0, 0)))
    idx = np.arange(t_out)[:, None] * stride + np.arange(k)[None, :]  # (T_out, k)
    windows = xp[:, idx, :]  # (B, T_out, k, C_in)
    out_data = np.tensordot(windows, w.data, axes=((2, 3), (0, 1)))

    def backward_fn(g):
        if w._tracked:
            w._accumulate(np.tensordot(windows, g, axes=((0, 1), (0, 1))))
        if x._tracked:
            g_windows = np.einsum("bto,kio->btki", g, w.data)
            gxp = np.zeros_like(xp)
            np.add.at(gxp, (slice(None), idx, slice(None)), g_windows)
            x._accumulate(gxp[:, padding:padding + t, :])

    return _make(out_data, "conv1d", (x, w), backward_fn)


def maxpool1d(x: Tensor, window: int, stride: int) -> Tensor:
    """Max pooling along time; ties route the gradient to the lowest index."""
    if x.data.ndim != 3:
        raise ShapeError(f"maxpool1d expects (B,T,C), got {x.shape}")
    b, t, c = x.shape
    t_out = (t - window) // stride + 1
    if t_out < 1:
        raise ShapeError(f"maxpool1d output length would be {t_out} "
                         f"(T={t}, window={window}, stride={stride})")
    idx = np.arange(t_out)[:, None] * stride + np.arange(window)[None, :]
    windows = x.data[:, idx, :]  # (B, T_out, window, C)
    arg = np.argmax(windows, axis=2)  # first maximum wins
    out_data = np.take_along_axis(windows, arg[:, :, None, :], axis=2).squeeze(2)

    def backward_fn(g):
        gx = np.zeros_like(x.data)
        b_idx = np.arange(b)[:, None, None]
        c_idx = np.arange(c)[None, None, :]
        t_idx = (np.arange(t_out) * stride)[None, :, None] + arg
        np.add.at(gx, (b_idx, t_idx, c_idx), g)
        x._accumulate(gx)

    return _make(out_data, "maxpool1d", (x,), backward_fn)


def adaptive_maxpool1d(x: Tensor, out_len: int) -> Tensor:
    """Max pooling to a fixed output length, whatever the input length.

    Output bin j covers time steps [floor(j*T/L), ceil((j+1)*T/L)); bins tile
    the whole sequence.
    """
    if x.data.ndim != 3:
        raise ShapeError(f"adaptive_maxpool1d expects (B,T,C), got {x.shape}")
    if out_len < 1:
        raise ParameterError(f"output length must be positive, got {out_len}")
    b, t, c = x.shape
    if t < 1:
        raise ShapeError("adaptive_maxpool1d needs a non-empty time axis")
    starts = [(j * t) // out_len for j in range(out_len)]
    ends = [-(-(j + 1) * t // out_len) for j in range(out_len)]  # ceil division
    out_data = np.empty((b, out_len, c))
    args = []
    for j, (s, e) in enumerate(zip(starts, ends)):
        seg = x.data[:, s:e, :]
        arg = np.argmax(seg, axis=1)  # (B, C), first maximum
        args.append(arg)
        out_data[:, j, :] = np.take_along_axis(seg, arg[:, None, :], axis=1).squeeze(1)

    def backward_fn(g):
        gx = np.zeros_like(x.data)
        b_idx = np.arange(b)[:, None]
        c_idx = np.arange(c)[None, :]
        for j, (s, arg) in enumerate(zip(starts, args)):
            np.add.at(gx, (b_idx, s + arg, c_idx), g[:, j, :])
        x._accumulate(gx)

    return _make(out_data, "adaptive_maxpool1d", (x,), backward_fn)


# ---------------------------------------------------------------------------
# reductions and losses
# ---------------------------------------------------------------------------

def sum_all(x: Tensor) -> Tensor:
    out_data = np.asarray(x.data.sum())

    def backward_fn(g):
        x._accumulate(np.broadcast_to(g, x.shape).copy())

    return _make(out_data, "sum", (x,), backward_fn)


def mean_all(x: Tensor) -> Tensor:
    n = x.data.size
    if n == 0:
        raise ParameterError("mean over an empty tensor")
    out_data = np.asarray(x.data.mean())

    def backward_fn(g):
        x._accumulate(np.broadcast_to(g / n, x.shape).copy())

    return _make(out_data, "mean", (x,), backward_fn)


def mse(pred: Tensor, target: Tensor) -> Tensor:
    """Mean squared error over all elements."""
    target = _lift(target)
    if pred.shape != target.shape:
        raise ShapeError(f"mse shape mismatch: {pred.shape} vs {target.shape}")
    if pred.data.size == 0:
        raise ParameterError("mse over empty tensors")
    diff = sub(pred, target)
    return mean_all(mul(diff, diff))


BCE_EPS = 1e-7


def bce(pred: Tensor, target: Tensor) -> Tensor:
    """Binary cross entropy; predictions are clamped to [1e-7, 1 - 1e-7]."""
    target = _lift(target)
    if pred.shape != target.shape:
        raise ShapeError(f"bce shape mismatch: {pred.shape} vs {target.shape}")
    if pred.data.size == 0:
        raise ParameterError("bce over empty tensors")
    if np.any(target.data < 0) or np.any(target.data > 1):
        raise ParameterError("bce targets must lie in [0, 1]")
    p = clip(pred, BCE_EPS, 1.0 - BCE_EPS)
    term = add(mul(target, log(p)), mul(_lift(1.0) - target, log(_lift(1.0) - p)))
    return mul(mean_all(term), _lift(-1.0))


def l1_norm(params: list[Tensor]) -> Tensor:
    """Sum of absolute values over a list of parameter tensors."""
    if not params:
        raise ParameterError("l1_norm of an empty parameter list")
    total = sum_all(absolute(params[0]))
    for p in params[1:]:
        total = add(total, sum_all(absolute(p)))
    return total


# ---------------------------------------------------------------------------
# backward pass and gradient checking
# ---------------------------------------------------------------------------

def _topo_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Populate gradients for every tracked tensor reachable from a scalar loss."""
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss._backward_ran:
        raise TapeError("backward called twice on the same tape; rerun the forward pass")
    loss._backward_ran = True
    loss.grad = np.ones_like(loss.data)
    for node in reversed(_topo_order(loss)):
        if node._backward_fn is not None and node.grad is not None:
            node._backward_fn(node.grad)


def zero_grads(params: list[Tensor]) -> None:
    for p in params:
        p.grad = None


def gradient_check(f, x: Tensor, h: float = 1e-5) -> float:
    """Max damped relative error between tape gradients and central differences.

    ``f`` must be a deterministic Tensor -> scalar Tensor function.  Each
    element's numeric gradient is (f(x+h) - f(x-h)) / 2h; the error is
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-4).
    """
    x.requires_grad = True
    x.grad = None
    out = f(x)
    backward(out)
    analytic = x.grad.copy()

    numeric = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    num_flat = numeric.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        f_plus = float(f(x).data)
        flat[i] = original - h
        f_minus = float(f(x).data)
        flat[i] = original
        num_flat[i] = (f_plus - f_minus) / (2.0 * h)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-4)
    return float(np.max(np.abs(analytic - numeric) / denom))
