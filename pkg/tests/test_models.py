"""Autoencoder, scorer, baselines, PCA, and the training loops."""

import numpy as np
import pytest

from rehabkit.autodiff import Tensor, backward, l1_norm, sum_all
from rehabkit.errors import (
    InsufficientDataError,
    ParameterError,
    ShapeError,
)
from rehabkit.features import context_window
from rehabkit.models import (
    AutoencoderConfig,
    AutoencoderModel,
    DeepLSTMModel,
    MultiScaleScorer,
    ScorerConfig,
    TrainConfig,
    encode,
    pca_fit,
    pca_reconstruct,
    pca_reconstruction_mse,
    predict_score,
    reconstruction_mse,
    score_mse,
    train_autoencoder,
    train_deep_lstm_baseline,
    train_scorer,
    train_val_split,
)

TINY_AE = AutoencoderConfig(hidden1=6, hidden2=4, latent=2)
TINY_SCORER = ScorerConfig(branch_channels=(4, 6), lstm_hidden=6, fc_hidden=4)


def harmonic_sequences(rng, n=6, t=16, k=4):
    """Small nonlinear sequences: harmonics of one phase."""
    out = []
    for _ in range(n):
        phase = rng.uniform(0, 2 * np.pi)
        theta = np.linspace(0, 2 * np.pi, t, endpoint=False) + phase
        seq = np.stack([np.sin(theta), np.cos(theta),
                        np.sin(2 * theta), np.cos(2 * theta)], axis=1)[:, :k]
        out.append(seq + rng.normal(0, 0.01, size=(t, k)))
    return out


# -- autoencoder --------------------------------------------------------------

def test_constant_zero_dataset_reconstructs_perfectly():
    sequences = [np.zeros((12, 4)) for _ in range(4)]
    cfg = TrainConfig(seed=0, patience=40, max_epochs=300, learning_rate=5e-3,
                      l1_coeff=0.0)
    model, log = train_autoencoder(sequences, cfg, TINY_AE)
    assert reconstruction_mse(model, sequences) < 1e-6


def test_l1_penalty_shrinks_encoder_weights(rng):
    sequences = harmonic_sequences(rng, n=4, t=10)
    runs = {}
    for lam in (0.0, 0.01):
        cfg = TrainConfig(seed=3, patience=100, max_epochs=120,
                          learning_rate=5e-3, l1_coeff=lam)
        model, log = train_autoencoder(sequences, cfg, TINY_AE)
        runs[lam] = log.entries[-1]["enc_l1"]
    assert runs[0.01] < runs[0.0]


def test_early_stopping_fires_before_max_epochs():
    sequences = [np.zeros((10, 3)) for _ in range(4)]
    cfg = TrainConfig(seed=0, patience=5, max_epochs=10000, learning_rate=5e-3,
                      l1_coeff=0.0)
    model, log = train_autoencoder(sequences, cfg,
                                   AutoencoderConfig(hidden1=5, hidden2=3, latent=2))
    assert len(log.entries) < 10000
    assert len(log.entries) - 1 - log.best_epoch == 5


def test_early_stopping_restores_best_checkpoint(rng):
    sequences = harmonic_sequences(rng, n=5, t=12)
    cfg = TrainConfig(seed=1, patience=15, max_epochs=150, learning_rate=5e-3)
    model, log = train_autoencoder(sequences, cfg, TINY_AE)
    logged = [e["val_loss"] for e in log.entries]
    assert log.best_val == min(logged)
    # halted at most `patience` epochs past the best one
    assert len(log.entries) - 1 - log.best_epoch <= cfg.patience
    # restored checkpoint recomputes the best validation loss exactly
    train_idx, val_idx = train_val_split(len(sequences), cfg.train_fraction, cfg.seed)
    x_val = np.stack([sequences[i] for i in val_idx])
    recon = model.reconstruct_tensor(Tensor(x_val)).data
    recomputed = float(np.mean((recon - x_val) ** 2))
    assert recomputed == pytest.approx(log.best_val, abs=1e-9)


def test_autoencoder_requires_two_sequences():
    with pytest.raises(InsufficientDataError):
        train_autoencoder([np.zeros((8, 3))], TrainConfig(seed=0), TINY_AE)


def test_autoencoder_rejects_mixed_lengths():
    with pytest.raises(ShapeError):
        train_autoencoder([np.zeros((8, 3)), np.zeros((9, 3))],
                          TrainConfig(seed=0), TINY_AE)


def test_encoder_widths_must_shrink():
    with pytest.raises(ParameterError):
        AutoencoderConfig(hidden1=4, hidden2=8, latent=2)
    with pytest.raises(ParameterError):
        AutoencoderModel(2, AutoencoderConfig(hidden1=8, hidden2=4, latent=2),
                         np.random.default_rng(0))


def test_encode_shape_and_determinism(rng):
    sequences = harmonic_sequences(rng, n=4, t=10)
    cfg = TrainConfig(seed=0, patience=5, max_epochs=20, learning_rate=3e-3)
    model, _ = train_autoencoder(sequences, cfg, TINY_AE)
    latent1 = encode(model, sequences[0])
    latent2 = encode(model, sequences[0])
    assert latent1.shape == (10, 2)
    np.testing.assert_array_equal(latent1, latent2)
    with pytest.raises(ShapeError):
        encode(model, np.zeros((10, 7)))


def test_latent_length_matches_input_length(rng):
    model = AutoencoderModel(4, TINY_AE, rng)
    for t in (5, 9, 16):
        assert encode(model, np.zeros((t, 4))).shape == (t, 2)


def test_l1_term_gives_decoder_zero_gradients(rng):
    model = AutoencoderModel(4, TINY_AE, rng)
    penalty = l1_norm(model.encoder_weights())
    backward(penalty)
    decoder_params = [model.dec1.wx, model.dec2.wx, model.dec3.wx,
                      model.out.w, model.out.b]
    assert all(p.grad is None for p in decoder_params)
    assert model.enc1_fwd.wx.grad is not None


def test_autoencoder_checkpoint_round_trip(rng, tmp_path):
    sequences = harmonic_sequences(rng, n=4, t=10)
    cfg = TrainConfig(seed=0, patience=5, max_epochs=15, learning_rate=3e-3)
    model, _ = train_autoencoder(sequences, cfg, TINY_AE)
    path = tmp_path / "autoencoder.json"
    model.save(path)
    loaded, meta = AutoencoderModel.load(path)
    assert meta["type"] == "autoencoder"
    np.testing.assert_array_equal(encode(loaded, sequences[0]),
                                  encode(model, sequences[0]))


# -- scorer and baseline --------------------------------------------------------

def scored_samples(rng, n=12, t=16, d=3):
    """Known score function: scaled mean of latent channel 0."""
    samples = []
    for _ in range(n):
        m = rng.normal(size=(t, d)) * 0.5
        level = rng.uniform(-1, 1)
        m[:, 0] += level
        score = 0.5 + 0.4 * level  # affine in the channel mean, inside (0,1)
        samples.append((m, score))
    return samples


def test_scorer_learns_channel_mean_score(rng):
    samples = scored_samples(rng, n=14)
    cfg = TrainConfig(seed=0, patience=150, max_epochs=900, learning_rate=3e-3)
    model, log = train_scorer(samples, cfg, TINY_SCORER)
    assert log.entries[log.best_epoch]["val_mse"] < 0.01


def test_scorer_constant_targets_converge(rng):
    target = 0.7
    samples = [(rng.normal(size=(12, 3)), target) for _ in range(8)]
    cfg = TrainConfig(seed=0, patience=100, max_epochs=400, learning_rate=3e-3)
    model, _ = train_scorer(samples, cfg, TINY_SCORER)
    preds = [predict_score(model, m) for m, _ in samples]
    assert max(abs(p - target) for p in preds) < 0.02


def test_predict_score_contract(rng):
    samples = scored_samples(rng, n=6, t=10)
    cfg = TrainConfig(seed=0, patience=10, max_epochs=30, learning_rate=3e-3)
    model, _ = train_scorer(samples, cfg, TINY_SCORER)
    m = samples[0][0]
    p1, p2 = predict_score(model, m), predict_score(model, m)
    assert p1 == p2
    assert 0.0 < p1 < 1.0
    assert 50.0 * p1 == pytest.approx(p1 * 50)
    wild = rng.normal(size=(10, 3)) * 100
    assert 0.0 < predict_score(model, wild) < 1.0
    with pytest.raises(ShapeError):
        predict_score(model, np.zeros((10, 5)))


def test_scorer_rejects_unscaled_scores(rng):
    samples = [(rng.normal(size=(8, 2)), 25.0), (rng.normal(size=(8, 2)), 30.0)]
    with pytest.raises(ParameterError):
        train_scorer(samples, TrainConfig(seed=0), TINY_SCORER)


def test_deep_lstm_baseline_trains(rng):
    samples = scored_samples(rng, n=10)
    cfg = TrainConfig(seed=0, patience=60, max_epochs=250, learning_rate=3e-3)
    model, log = train_deep_lstm_baseline(samples, cfg, TINY_SCORER)
    final = score_mse(model, samples)
    assert np.isfinite(final)
    assert log.entries[log.best_epoch]["val_mse"] < 0.05


def test_identical_split_across_model_kinds(rng):
    idx_a = train_val_split(10, 0.8, seed=4)
    idx_b = train_val_split(10, 0.8, seed=4)
    np.testing.assert_array_equal(idx_a[0], idx_b[0])
    np.testing.assert_array_equal(idx_a[1], idx_b[1])
    assert len(idx_a[1]) >= 1


def test_scorer_checkpoint_round_trip(rng, tmp_path):
    samples = scored_samples(rng, n=6, t=12)
    cfg = TrainConfig(seed=0, patience=10, max_epochs=25, learning_rate=3e-3)
    model, _ = train_scorer(samples, cfg, TINY_SCORER)
    path = tmp_path / "scorer.json"
    model.save(path)
    loaded, _ = MultiScaleScorer.load(path)
    m = samples[0][0]
    assert predict_score(loaded, m) == predict_score(model, m)


def test_multiscale_branches_align(rng):
    # three branch outputs share one temporal length before the channel merge
    model = MultiScaleScorer(3, pool_len=4, config=TINY_SCORER, rng=rng)
    for t in (11, 16, 23):
        out = model.forward(Tensor(rng.normal(size=(1, t, 3))))
        assert out.shape == (1, 1)


def test_context_window_feeds_scorer(rng):
    latent = rng.normal(size=(14, 2))
    windowed = context_window(latent, 3)
    assert windowed.shape == (14, 6)
    model = MultiScaleScorer(6, pool_len=3, config=TINY_SCORER,
                             rng=np.random.default_rng(0))
    assert 0.0 < predict_score(model, windowed) < 1.0


# -- PCA ------------------------------------------------------------------------

def test_pca_full_basis_zero_error(rng):
    data = rng.normal(size=(30, 5))
    model = pca_fit(data, 5)
    assert pca_reconstruction_mse(model, data) < 1e-18


def test_pca_planar_data_recovered(rng):
    basis = rng.normal(size=(2, 6))
    coeffs = rng.normal(size=(40, 2))
    data = coeffs @ basis + rng.normal(size=(1, 6)) * 0.0 + 3.0
    model = pca_fit(data, 2)
    assert pca_reconstruction_mse(model, data) < 1e-18


def test_pca_error_non_increasing_in_dims(rng):
    data = rng.normal(size=(50, 8))
    errors = [pca_reconstruction_mse(pca_fit(data, d), data) for d in range(1, 9)]
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


def test_pca_rejects_excess_dims(rng):
    with pytest.raises(ParameterError):
        pca_fit(rng.normal(size=(10, 4)), 5)


def svd_reconstruction_oracle(data, dims):
    """Independent oracle: truncated SVD of the centered matrix."""
    mean = data.mean(axis=0)
    centered = data - mean
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    approx = (u[:, :dims] * s[:dims]) @ vt[:dims] + mean
    return float(np.mean((data - approx) ** 2))


def test_pca_matches_svd_oracle(rng):
    for seed in range(5):
        local = np.random.default_rng(seed)
        data = local.normal(size=(50, 10)) @ np.diag(np.linspace(3, 0.1, 10))
        for dims in (1, 3, 7):
            ours = pca_reconstruction_mse(pca_fit(data, dims), data)
            oracle = svd_reconstruction_oracle(data, dims)
            assert abs(ours - oracle) < 1e-9


def test_pca_reconstruct_shape(rng):
    data = rng.normal(size=(20, 6))
    model = pca_fit(data, 3)
    assert pca_reconstruct(model, data).shape == (20, 6)
