"""Gradient-descent optimizers and parameter checkpoint files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ParameterError, StateError
from .tensor import Tensor


@dataclass
class Optimizer:
    """SGD or Adam.  Adam uses the usual bias-corrected moment estimates."""

    kind: str = "adam"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    _m: dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    _v: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise ParameterError(f"optimizer kind must be sgd|adam, got {self.kind!r}")
        if self.learning_rate <= 0:
            raise ParameterError(f"learning rate must be positive, got {self.learning_rate}")


def optimizer_step(opt: Optimizer, params: list[Tensor]) -> None:
    """Apply one update to every parameter, then clear their gradients."""
    for i, p in enumerate(params):
        if p.grad is None:
            raise StateError(f"parameter {i} has no gradient; run backward first")
        if p.grad.shape != p.data.shape:
            raise StateError(f"parameter {i} gradient shape {p.grad.shape} "
                             f"does not match data shape {p.data.shape}")
    opt.step_count += 1
    for p in params:
        g = p.grad
        if opt.kind == "sgd":
            p.data -= opt.learning_rate * g
        else:
            key = id(p)
            m = opt._m.get(key)
            if m is None:
                m = np.zeros_like(p.data)
                opt._v[key] = np.zeros_like(p.data)
            v = opt._v[key]
            m = opt.beta1 * m + (1.0 - opt.beta1) * g
            v = opt.beta2 * v + (1.0 - opt.beta2) * (g * g)
            opt._m[key], opt._v[key] = m, v
            m_hat = m / (1.0 - opt.beta1 ** opt.step_count)
            v_hat = v / (1.0 - opt.beta2 ** opt.step_count)
            p.data -= opt.learning_rate * m_hat / (np.sqrt(v_hat) + opt.epsilon)
        p.grad = None


CHECKPOINT_VERSION = 1


def save_params(path: str | Path, params: dict[str, Tensor | np.ndarray],
                meta: dict | None = None) -> None:
    """Write a named-parameter checkpoint as JSON.

    Row-major float64 values serialize via repr, so finite parameters
    round-trip bit-exactly.
    """
    payload = {
        "version": CHECKPOINT_VERSION,
        "meta": meta or {},
        "params": {
            name: {
                "shape": list(np.shape(t.data if isinstance(t, Tensor) else t)),
                "data": [float(v) for v in
                         np.asarray(t.data if isinstance(t, Tensor) else t).reshape(-1)],
            }
            for name, t in params.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_params(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ParameterError(f"{path}: unsupported checkpoint version "
                             f"{payload.get('version')!r}")
    params = {
        name: np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in payload["params"].items()
    }
    return params, payload.get("meta", {})
