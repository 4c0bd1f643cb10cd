#!/usr/bin/env python3
"""Produce everything the live service needs: template .rec files for all
five exercises plus a trained scoring pipeline (feature scaler, autoencoder,
multi-scale scorer) for the exercises you pick.

    python3 scripts/train_service_models.py --out service_state [--exercises E1]

Then:

    rehabkit serve --templates service_state/templates \
        --checkpoints service_state/checkpoints
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rehabkit.features import FeatureScaler, context_window, default_feature_specs, extract_features
from rehabkit.models import (
    AutoencoderConfig,
    ScorerConfig,
    TrainConfig,
    encode,
    train_autoencoder,
    train_scorer,
)
from rehabkit.service import ScoringPipeline
from rehabkit.skeleton_io import equalize_lengths, save_recording
from rehabkit.synth import SynthConfig, generate_synthetic, generate_template


def train_pipeline(exercise: str, outdir: Path, seed: int) -> None:
    synth = SynthConfig(exercise=exercise, n_healthy=16, n_impaired=12, frames=48,
                        noise_std=0.01, attenuation_range=(0.85, 1.0),
                        weakness_burst_max=0.8, length_jitter=4, seed=seed)
    dataset = equalize_lengths(generate_synthetic(synth), exercise)
    spec = default_feature_specs()[exercise]
    feats = [extract_features(r, spec) for r in dataset.recordings]
    healthy = [f for f in feats if f.subject_id.startswith("H")]
    scaler = FeatureScaler.fit([f.values for f in healthy])

    print(f"[{exercise}] training autoencoder on {len(healthy)} healthy recordings")
    autoencoder, ae_log = train_autoencoder(
        [scaler.transform(f.values) for f in healthy],
        TrainConfig(seed=0, patience=50, max_epochs=350, learning_rate=3e-3),
        AutoencoderConfig(hidden1=12, hidden2=8, latent=4))
    print(f"[{exercise}] autoencoder best val {ae_log.best_val:.4f} "
          f"({len(ae_log.entries)} epochs)")

    window = 3
    samples = [(context_window(encode(autoencoder, scaler.transform(f.values)), window),
                f.score) for f in feats]
    scorer, s_log = train_scorer(
        samples,
        TrainConfig(seed=0, patience=150, max_epochs=800, learning_rate=1.5e-3),
        ScorerConfig(branch_channels=(8, 16), lstm_hidden=16, fc_hidden=8))
    best = s_log.entries[s_log.best_epoch]
    print(f"[{exercise}] scorer best val MSE {best['val_mse']:.4f} "
          f"({len(s_log.entries)} epochs)")

    pipeline = ScoringPipeline(exercise_id=exercise, spec=spec, scaler=scaler,
                               autoencoder=autoencoder, scorer=scorer, window=window)
    pipeline.save(outdir / "checkpoints" / exercise)
    ae_log.save(outdir / "checkpoints" / exercise / "autoencoder_log.jsonl")
    s_log.save(outdir / "checkpoints" / exercise / "scorer_log.jsonl")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="service_state")
    parser.add_argument("--exercises", nargs="+", default=["E1"],
                        choices=["E1", "E2", "E3", "E4", "E5"])
    parser.add_argument("--frames", type=int, default=48)
    parser.add_argument("--seed", type=int, default=17)
    args = parser.parse_args()

    outdir = Path(args.out)
    (outdir / "templates").mkdir(parents=True, exist_ok=True)
    for exercise in ("E1", "E2", "E3", "E4", "E5"):
        template = generate_template(SynthConfig(exercise=exercise,
                                                 frames=args.frames, seed=7))
        save_recording(outdir / "templates" / f"{exercise}.rec", template)
    print(f"templates written to {outdir / 'templates'}")

    # a replay file for the dashboard demo: a mildly impaired performance
    replay_cfg = SynthConfig(exercise="E1", n_healthy=0, n_impaired=1,
                             frames=args.frames, noise_std=0.01,
                             attenuation_range=(0.8, 0.8), seed=args.seed)
    replay = generate_synthetic(replay_cfg).recordings[0]
    save_recording(outdir / "replay_E1.rec", replay)
    print(f"replay file written to {outdir / 'replay_E1.rec'}")

    started = time.perf_counter()
    for exercise in args.exercises:
        train_pipeline(exercise, outdir, args.seed)
    print(f"done in {time.perf_counter() - started:.0f}s; "
          f"serve with: rehabkit serve --templates {outdir / 'templates'} "
          f"--checkpoints {outdir / 'checkpoints'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
