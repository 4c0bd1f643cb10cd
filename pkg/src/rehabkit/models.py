"""Sequence autoencoder, multi-scale CNN-LSTM scorer, and baselines.

The autoencoder compresses per-frame feature vectors: two bidirectional LSTMs
of shrinking width feed a stride-1 convolution whose output is the latent
sequence; three stacked LSTMs plus a linear read-out reconstruct the input.
Training minimizes reconstruction MSE plus an L1 penalty on the encoder
weights.

The scorer consumes context-windowed latent sequences at three time scales
(full, half, quarter), one small CNN branch per scale, merges the pooled
branch outputs channel-wise, and regresses a sigmoid score through an LSTM
stack and a fully connected head, trained with binary cross entropy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .autodiff import (
    DenseParams,
    LSTMParams,
    Optimizer,
    Tensor,
    adaptive_maxpool1d,
    backward,
    bce,
    bilstm_layer,
    concat,
    conv1d,
    dense,
    downsample,
    init_dense,
    init_lstm,
    l1_norm,
    lstm_layer,
    mse,
    optimizer_step,
    relu,
    sigmoid,
    uniform_init,
)
from .autodiff.optim import load_params, save_params
from .errors import (
    InsufficientDataError,
    NumericsError,
    ParameterError,
    ShapeError,
    TrainingError,
)
from .features import FeatureSequence


@dataclass
class TrainConfig:
    """Shared training knobs: split, early stopping, optimizer, seed."""

    seed: int = 0
    train_fraction: float = 0.8
    patience: int = 50
    max_epochs: int = 2000
    learning_rate: float = 1e-3
    l1_coeff: float = 1e-4  # autoencoder encoder-weight penalty
    context_window: int = 3
    batch_size: int | None = None  # None = full batch
    optimizer: str = "adam"

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ParameterError(f"train_fraction must be in (0,1), got {self.train_fraction}")
        if self.patience < 1:
            raise ParameterError(f"patience must be >= 1, got {self.patience}")
        if self.context_window < 1 or self.context_window % 2 == 0:
            raise ParameterError(f"context window must be odd, got {self.context_window}")
        if self.l1_coeff < 0:
            raise ParameterError(f"l1_coeff must be >= 0, got {self.l1_coeff}")


@dataclass
class TrainingLog:
    """Per-epoch records plus the best-validation bookkeeping."""

    entries: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_val: float = float("inf")

    def append(self, **record) -> None:
        self.entries.append(record)

    def save(self, path: str | Path) -> None:
        import json
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.entries:
                fh.write(json.dumps(entry) + "\n")


def train_val_split(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffled split with at least one item on each side.

    Every trainer derives its split from this function and only from the
    seed, so different model kinds trained under one seed see identical
    train/validation partitions.
    """
    rng = np.random.default_rng([seed, 0])
    perm = rng.permutation(n)
    n_train = int(round(fraction * n))
    n_train = min(max(n_train, 1), n - 1)
    return perm[:n_train], perm[n_train:]


def _snapshot(params: dict[str, Tensor]) -> dict[str, np.ndarray]:
    return {name: t.data.copy() for name, t in params.items()}


def _restore(params: dict[str, Tensor], snap: dict[str, np.ndarray]) -> None:
    for name, t in params.items():
        t.data = snap[name].copy()
        t.grad = None


# ---------------------------------------------------------------------------
# Autoencoder
# ---------------------------------------------------------------------------

@dataclass
class AutoencoderConfig:
    hidden1: int = 32  # first bidirectional layer, per direction
    hidden2: int = 16  # second bidirectional layer, per direction
    latent: int = 8
    kernel: int = 3

    def __post_init__(self):
        if not (self.hidden1 > self.hidden2 >= self.latent):
            raise ParameterError(
                f"encoder widths must shrink: hidden1 > hidden2 >= latent, "
                f"got ({self.hidden1}, {self.hidden2}, {self.latent})")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ParameterError(f"conv kernel must be odd for same-length latents, "
                                 f"got {self.kernel}")


class AutoencoderModel:
    """Bidirectional-LSTM encoder + conv latent, stacked-LSTM decoder."""

    def __init__(self, feature_width: int, config: AutoencoderConfig, rng: np.random.Generator):
        if config.latent >= feature_width:
            raise ParameterError(f"latent width {config.latent} must be smaller than "
                                 f"the feature width {feature_width}")
        self.feature_width = feature_width
        self.config = config
        c = config
        self.enc1_fwd = init_lstm(rng, feature_width, c.hidden1)
        self.enc1_bwd = init_lstm(rng, feature_width, c.hidden1)
        self.enc2_fwd = init_lstm(rng, 2 * c.hidden1, c.hidden2)
        self.enc2_bwd = init_lstm(rng, 2 * c.hidden1, c.hidden2)
        conv_fan_in = c.kernel * 2 * c.hidden2
        self.conv_w = Tensor(uniform_init(rng, (c.kernel, 2 * c.hidden2, c.latent), conv_fan_in),
                             requires_grad=True)
        self.conv_b = Tensor(np.zeros(c.latent), requires_grad=True)
        self.dec1 = init_lstm(rng, c.latent, c.hidden2)
        self.dec2 = init_lstm(rng, c.hidden2, c.hidden1)
        self.dec3 = init_lstm(rng, c.hidden1, feature_width)
        self.out = init_dense(rng, feature_width, feature_width)

    def named_params(self) -> dict[str, Tensor]:
        named = {}
        for prefix, p in [("enc1_fwd", self.enc1_fwd), ("enc1_bwd", self.enc1_bwd),
                          ("enc2_fwd", self.enc2_fwd), ("enc2_bwd", self.enc2_bwd),
                          ("dec1", self.dec1), ("dec2", self.dec2), ("dec3", self.dec3)]:
            named[f"{prefix}.wx"] = p.wx
            named[f"{prefix}.wh"] = p.wh
            named[f"{prefix}.b"] = p.b
        named["conv.w"] = self.conv_w
        named["conv.b"] = self.conv_b
        named["out.w"] = self.out.w
        named["out.b"] = self.out.b
        return named

    def param_list(self) -> list[Tensor]:
        return list(self.named_params().values())

    def encoder_weights(self) -> list[Tensor]:
        """Weight matrices of the encoder only (biases excluded), for the L1 penalty."""
        weights = []
        for p in (self.enc1_fwd, self.enc1_bwd, self.enc2_fwd, self.enc2_bwd):
            weights.extend([p.wx, p.wh])
        weights.append(self.conv_w)
        return weights

    def encode_tensor(self, x: Tensor) -> Tensor:
        h = bilstm_layer(x, self.enc1_fwd, self.enc1_bwd)
        h = bilstm_layer(h, self.enc2_fwd, self.enc2_bwd)
        pad = (self.config.kernel - 1) // 2
        return conv1d(h, self.conv_w, stride=1, padding=pad) + self.conv_b

    def decode_tensor(self, latent: Tensor) -> Tensor:
        h = lstm_layer(latent, self.dec1)
        h = lstm_layer(h, self.dec2)
        h = lstm_layer(h, self.dec3)
        return dense(h, self.out)

    def reconstruct_tensor(self, x: Tensor) -> Tensor:
        return self.decode_tensor(self.encode_tensor(x))

    # -- checkpointing ------------------------------------------------------

    def save(self, path: str | Path, extra_meta: dict | None = None) -> None:
        meta = {"type": "autoencoder", "feature_width": self.feature_width,
                "hidden1": self.config.hidden1, "hidden2": self.config.hidden2,
                "latent": self.config.latent, "kernel": self.config.kernel}
        meta.update(extra_meta or {})
        save_params(path, self.named_params(), meta=meta)

    @classmethod
    def load(cls, path: str | Path) -> tuple["AutoencoderModel", dict]:
        params, meta = load_params(path)
        config = AutoencoderConfig(hidden1=meta["hidden1"], hidden2=meta["hidden2"],
                                   latent=meta["latent"], kernel=meta["kernel"])
        model = cls(meta["feature_width"], config, np.random.default_rng(0))
        for name, tensor in model.named_params().items():
            if tensor.data.shape != params[name].shape:
                raise ShapeError(f"checkpoint param {name} has shape {params[name].shape}, "
                                 f"expected {tensor.data.shape}")
            tensor.data = params[name]
        return model, meta


def _as_matrices(sequences: list) -> list[np.ndarray]:
    out = []
    for seq in sequences:
        values = seq.values if isinstance(seq, FeatureSequence) else np.asarray(seq)
        out.append(np.asarray(values, dtype=np.float64))
    return out


def _stack_equal_length(matrices: list[np.ndarray]) -> np.ndarray:
    lengths = {m.shape[0] for m in matrices}
    widths = {m.shape[1] for m in matrices}
    if len(lengths) != 1:
        raise ShapeError(f"sequences must share one equalized length, got {sorted(lengths)}")
    if len(widths) != 1:
        raise ShapeError(f"sequences must share one feature width, got {sorted(widths)}")
    return np.stack(matrices)


def train_autoencoder(features: list, cfg: TrainConfig,
                      arch: AutoencoderConfig | None = None,
                      ) -> tuple[AutoencoderModel, TrainingLog]:
    """Fit the autoencoder on equal-length sequences (healthy cohort).

    Minimizes reconstruction MSE plus ``cfg.l1_coeff`` times the L1 norm of
    the encoder weights; early-stops when validation reconstruction MSE has
    not improved for ``cfg.patience`` epochs and restores the best epoch.
    """
    matrices = _as_matrices(features)
    if len(matrices) < 2:
        raise InsufficientDataError(f"need at least 2 sequences, got {len(matrices)}")
    data = _stack_equal_length(matrices)
    arch = arch or AutoencoderConfig()

    rng = np.random.default_rng([cfg.seed, 1])
    model = AutoencoderModel(data.shape[2], arch, rng)
    train_idx, val_idx = train_val_split(len(matrices), cfg.train_fraction, cfg.seed)
    x_train_all = data[train_idx]
    x_val = Tensor(data[val_idx])

    params = model.named_params()
    opt = Optimizer(kind=cfg.optimizer, learning_rate=cfg.learning_rate)
    log = TrainingLog()
    best_snap = _snapshot(params)

    for epoch in range(cfg.max_epochs):
        try:
            train_loss = _autoencoder_epoch(model, x_train_all, cfg, opt, rng)
            val_loss = float(mse(model.reconstruct_tensor(x_val), x_val).data)
        except NumericsError as exc:
            raise TrainingError(f"training diverged at epoch {epoch}: {exc}",
                                epoch=epoch) from exc
        enc_l1 = float(sum(np.abs(w.data).sum() for w in model.encoder_weights()))
        log.append(epoch=epoch, train_loss=train_loss, val_loss=val_loss, enc_l1=enc_l1)
        if val_loss < log.best_val:
            log.best_val = val_loss
            log.best_epoch = epoch
            best_snap = _snapshot(params)
        if epoch - log.best_epoch >= cfg.patience:
            break

    _restore(params, best_snap)
    return model, log


def _autoencoder_epoch(model: AutoencoderModel, x_train: np.ndarray,
                       cfg: TrainConfig, opt: Optimizer, rng: np.random.Generator) -> float:
    batches = _batches(len(x_train), cfg.batch_size, rng)
    losses = []
    for batch_idx in batches:
        xb = Tensor(x_train[batch_idx])
        loss = mse(model.reconstruct_tensor(xb), xb)
        if cfg.l1_coeff > 0:
            loss = loss + cfg.l1_coeff * l1_norm(model.encoder_weights())
        backward(loss)
        optimizer_step(opt, model.param_list())
        losses.append(float(loss.data))
    return float(np.mean(losses))


def _batches(n: int, batch_size: int | None, rng: np.random.Generator) -> list[np.ndarray]:
    if batch_size is None or batch_size >= n:
        return [np.arange(n)]
    perm = rng.permutation(n)
    return [perm[i:i + batch_size] for i in range(0, n, batch_size)]


def encode(model: AutoencoderModel, seq) -> np.ndarray:
    """Deterministic latent sequence (M, latent) for one feature sequence."""
    values = seq.values if isinstance(seq, FeatureSequence) else np.asarray(seq)
    if values.ndim != 2 or values.shape[1] != model.feature_width:
        raise ShapeError(f"expected (M, {model.feature_width}) input, got {values.shape}")
    latent = model.encode_tensor(Tensor(values[None]))
    return latent.data[0]


def reconstruction_mse(model: AutoencoderModel, sequences: list) -> float:
    """Mean over sequences of per-element squared reconstruction error."""
    matrices = _as_matrices(sequences)
    if not matrices:
        raise InsufficientDataError("reconstruction_mse of an empty dataset")
    errors = []
    for m in matrices:
        recon = model.reconstruct_tensor(Tensor(m[None])).data[0]
        errors.append(float(np.mean((recon - m) ** 2)))
    return float(np.mean(errors))


# ---------------------------------------------------------------------------
# Multi-scale CNN-LSTM scorer and the deep-LSTM baseline
# ---------------------------------------------------------------------------

@dataclass
class ScorerConfig:
    branch_channels: tuple[int, int] = (16, 32)
    kernel: int = 3
    lstm_hidden: int = 32
    fc_hidden: int = 16
    scales: tuple[int, ...] = (1, 2, 4)

    def __post_init__(self):
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ParameterError(f"conv kernel must be odd, got {self.kernel}")
        if len(self.scales) < 1 or any(s < 1 for s in self.scales):
            raise ParameterError(f"scales must be positive, got {self.scales}")


class MultiScaleScorer:
    """Three-scale CNN branches, channel-merged, LSTM stack, sigmoid head."""

    def __init__(self, input_width: int, pool_len: int, config: ScorerConfig,
                 rng: np.random.Generator):
        self.input_width = input_width
        self.pool_len = pool_len
        self.config = config
        c1, c2 = config.branch_channels
        k = config.kernel
        self.branches = []
        for _ in config.scales:
            self.branches.append({
                "w1": Tensor(uniform_init(rng, (k, input_width, c1), k * input_width),
                             requires_grad=True),
                "b1": Tensor(np.zeros(c1), requires_grad=True),
                "w2": Tensor(uniform_init(rng, (k, c1, c2), k * c1), requires_grad=True),
                "b2": Tensor(np.zeros(c2), requires_grad=True),
            })
        merged = c2 * len(config.scales)
        self.lstm1 = init_lstm(rng, merged, config.lstm_hidden)
        self.lstm2 = init_lstm(rng, config.lstm_hidden, config.lstm_hidden)
        self.fc1 = init_dense(rng, config.lstm_hidden, config.fc_hidden)
        self.fc2 = init_dense(rng, config.fc_hidden, 1)

    def named_params(self) -> dict[str, Tensor]:
        named = {}
        for s, branch in zip(self.config.scales, self.branches):
            for key, tensor in branch.items():
                named[f"branch{s}.{key}"] = tensor
        for prefix, p in [("lstm1", self.lstm1), ("lstm2", self.lstm2)]:
            named[f"{prefix}.wx"], named[f"{prefix}.wh"], named[f"{prefix}.b"] = p.wx, p.wh, p.b
        named["fc1.w"], named["fc1.b"] = self.fc1.w, self.fc1.b
        named["fc2.w"], named["fc2.b"] = self.fc2.w, self.fc2.b
        return named

    def param_list(self) -> list[Tensor]:
        return list(self.named_params().values())

    def forward(self, x: Tensor) -> Tensor:
        """(B, T, D) context-windowed latents -> (B, 1) score in (0, 1)."""
        if x.shape[-1] != self.input_width:
            raise ShapeError(f"expected input width {self.input_width}, got {x.shape}")
        pad = (self.config.kernel - 1) // 2
        pooled = []
        for scale, p in zip(self.config.scales, self.branches):
            xi = downsample(x, scale) if scale > 1 else x
            h = relu(conv1d(xi, p["w1"], stride=1, padding=pad) + p["b1"])
            h = relu(conv1d(h, p["w2"], stride=1, padding=pad) + p["b2"])
            pooled.append(adaptive_maxpool1d(h, self.pool_len))
        merged = concat(pooled, axis=2)
        h = lstm_layer(merged, self.lstm1)
        h = lstm_layer(h, self.lstm2)
        z = relu(dense(h[:, -1, :], self.fc1))
        return sigmoid(dense(z, self.fc2))

    def save(self, path: str | Path, extra_meta: dict | None = None) -> None:
        meta = {"type": "multiscale_scorer", "input_width": self.input_width,
                "pool_len": self.pool_len,
                "branch_channels": list(self.config.branch_channels),
                "kernel": self.config.kernel, "lstm_hidden": self.config.lstm_hidden,
                "fc_hidden": self.config.fc_hidden, "scales": list(self.config.scales)}
        meta.update(extra_meta or {})
        save_params(path, self.named_params(), meta=meta)

    @classmethod
    def load(cls, path: str | Path) -> tuple["MultiScaleScorer", dict]:
        params, meta = load_params(path)
        config = ScorerConfig(branch_channels=tuple(meta["branch_channels"]),
                              kernel=meta["kernel"], lstm_hidden=meta["lstm_hidden"],
                              fc_hidden=meta["fc_hidden"], scales=tuple(meta["scales"]))
        model = cls(meta["input_width"], meta["pool_len"], config, np.random.default_rng(0))
        for name, tensor in model.named_params().items():
            tensor.data = params[name]
        return model, meta


class DeepLSTMModel:
    """Two stacked LSTMs straight into the sigmoid head; the comparison baseline."""

    def __init__(self, input_width: int, config: ScorerConfig, rng: np.random.Generator):
        self.input_width = input_width
        self.config = config
        self.lstm1 = init_lstm(rng, input_width, config.lstm_hidden)
        self.lstm2 = init_lstm(rng, config.lstm_hidden, config.lstm_hidden)
        self.fc1 = init_dense(rng, config.lstm_hidden, config.fc_hidden)
        self.fc2 = init_dense(rng, config.fc_hidden, 1)

    def named_params(self) -> dict[str, Tensor]:
        named = {}
        for prefix, p in [("lstm1", self.lstm1), ("lstm2", self.lstm2)]:
            named[f"{prefix}.wx"], named[f"{prefix}.wh"], named[f"{prefix}.b"] = p.wx, p.wh, p.b
        named["fc1.w"], named["fc1.b"] = self.fc1.w, self.fc1.b
        named["fc2.w"], named["fc2.b"] = self.fc2.w, self.fc2.b
        return named

    def param_list(self) -> list[Tensor]:
        return list(self.named_params().values())

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.input_width:
            raise ShapeError(f"expected input width {self.input_width}, got {x.shape}")
        h = lstm_layer(x, self.lstm1)
        h = lstm_layer(h, self.lstm2)
        z = relu(dense(h[:, -1, :], self.fc1))
        return sigmoid(dense(z, self.fc2))

    def save(self, path: str | Path, extra_meta: dict | None = None) -> None:
        meta = {"type": "deep_lstm", "input_width": self.input_width,
                "lstm_hidden": self.config.lstm_hidden, "fc_hidden": self.config.fc_hidden}
        meta.update(extra_meta or {})
        save_params(path, self.named_params(), meta=meta)


def _prepare_scored(samples: list[tuple[np.ndarray, float]]) -> tuple[np.ndarray, np.ndarray]:
    if len(samples) < 2:
        raise InsufficientDataError(f"need at least 2 scored sequences, got {len(samples)}")
    matrices = [np.asarray(m, dtype=np.float64) for m, _ in samples]
    scores = np.array([s for _, s in samples], dtype=np.float64)
    if np.any(scores < 0) or np.any(scores > 1):
        raise ParameterError("scores must be scaled to [0, 1] before training")
    return _stack_equal_length(matrices), scores.reshape(-1, 1)


def _train_score_model(model, data: np.ndarray, scores: np.ndarray,
                       cfg: TrainConfig, rng: np.random.Generator) -> TrainingLog:
    """Shared BCE training loop with early stopping and best-epoch restore."""
    train_idx, val_idx = train_val_split(len(data), cfg.train_fraction, cfg.seed)
    x_train, y_train = data[train_idx], scores[train_idx]
    x_val, y_val = Tensor(data[val_idx]), Tensor(scores[val_idx])

    params = model.named_params()
    opt = Optimizer(kind=cfg.optimizer, learning_rate=cfg.learning_rate)
    log = TrainingLog()
    best_snap = _snapshot(params)

    for epoch in range(cfg.max_epochs):
        try:
            losses = []
            for batch_idx in _batches(len(x_train), cfg.batch_size, rng):
                loss = bce(model.forward(Tensor(x_train[batch_idx])),
                           Tensor(y_train[batch_idx]))
                backward(loss)
                optimizer_step(opt, model.param_list())
                losses.append(float(loss.data))
            train_loss = float(np.mean(losses))
            val_pred = model.forward(x_val)
            val_loss = float(bce(val_pred, y_val).data)
            val_mse = float(np.mean((val_pred.data - y_val.data) ** 2))
        except NumericsError as exc:
            raise TrainingError(f"training diverged at epoch {epoch}: {exc}",
                                epoch=epoch) from exc
        log.append(epoch=epoch, train_loss=train_loss, val_loss=val_loss, val_mse=val_mse)
        if val_loss < log.best_val:
            log.best_val = val_loss
            log.best_epoch = epoch
            best_snap = _snapshot(params)
        if epoch - log.best_epoch >= cfg.patience:
            break

    _restore(params, best_snap)
    return log


def train_scorer(samples: list[tuple[np.ndarray, float]], cfg: TrainConfig,
                 arch: ScorerConfig | None = None,
                 ) -> tuple[MultiScaleScorer, TrainingLog]:
    """Train the multi-scale scorer on (context-windowed latent, score) pairs.

    Scores must already be scaled to [0, 1] and the context window applied;
    early stopping monitors validation BCE (patience per ``cfg``).
    """
    data, scores = _prepare_scored(samples)
    arch = arch or ScorerConfig()
    rng = np.random.default_rng([cfg.seed, 1])
    pool_len = max(1, data.shape[1] // 4)
    model = MultiScaleScorer(data.shape[2], pool_len, arch, rng)
    log = _train_score_model(model, data, scores, cfg, rng)
    return model, log


def train_deep_lstm_baseline(samples: list[tuple[np.ndarray, float]], cfg: TrainConfig,
                             arch: ScorerConfig | None = None,
                             ) -> tuple[DeepLSTMModel, TrainingLog]:
    """Train the stacked-LSTM baseline under the identical protocol."""
    data, scores = _prepare_scored(samples)
    arch = arch or ScorerConfig()
    rng = np.random.default_rng([cfg.seed, 1])
    model = DeepLSTMModel(data.shape[2], arch, rng)
    log = _train_score_model(model, data, scores, cfg, rng)
    return model, log


def predict_score(model, latent_with_context: np.ndarray) -> float:
    """Deterministic score in (0, 1); multiply by 50 for the clinical scale."""
    values = np.asarray(latent_with_context, dtype=np.float64)
    if values.ndim != 2:
        raise ShapeError(f"expected an (M, D) matrix, got shape {values.shape}")
    out = model.forward(Tensor(values[None]))
    return float(out.data[0, 0])


def score_mse(model, samples: list[tuple[np.ndarray, float]]) -> float:
    """Mean squared error of predictions against [0, 1] scores."""
    if not samples:
        raise InsufficientDataError("score_mse of an empty dataset")
    errors = [(predict_score(model, m) - s) ** 2 for m, s in samples]
    return float(np.mean(errors))


# ---------------------------------------------------------------------------
# PCA baseline (eigendecomposition of the pooled frame covariance)
# ---------------------------------------------------------------------------

@dataclass
class PCAModel:
    mean: np.ndarray  # (D,)
    components: np.ndarray  # (D, dims), orthonormal columns


def pca_fit(data: np.ndarray, dims: int) -> PCAModel:
    """Top principal components of row vectors via covariance eigendecomposition."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ShapeError(f"expected (N, D) data, got shape {data.shape}")
    n, d = data.shape
    if not (1 <= dims <= d):
        raise ParameterError(f"dims must be in [1, {d}], got {dims}")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / max(n - 1, 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    return PCAModel(mean=mean, components=eigenvectors[:, order[:dims]])


def pca_reconstruct(model: PCAModel, data: np.ndarray) -> np.ndarray:
    centered = np.asarray(data, dtype=np.float64) - model.mean
    return centered @ model.components @ model.components.T + model.mean


def pca_reconstruction_mse(model: PCAModel, data: np.ndarray) -> float:
    recon = pca_reconstruct(model, data)
    return float(np.mean((np.asarray(data) - recon) ** 2))
