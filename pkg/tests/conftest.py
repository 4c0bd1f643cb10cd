"""Shared fixtures: small synthetic recordings and frames."""

import numpy as np
import pytest

from rehabkit.skeleton_io import NUM_JOINTS, Recording, SkeletonFrame
from rehabkit.synth import SynthConfig, generate_synthetic, generate_template


def make_frame(rng: np.random.Generator, index: int = 0) -> SkeletonFrame:
    """A valid random frame: positions anywhere, orientations unit."""
    quats = rng.normal(size=(NUM_JOINTS, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    return SkeletonFrame(
        positions=rng.normal(size=(NUM_JOINTS, 3)),
        orientations=quats,
        frame_index=index,
        timestamp_ms=index * 33.0,
    )


def make_recording(rng: np.random.Generator, n_frames: int = 10,
                   exercise: str = "E1", score: float | None = 42.0) -> Recording:
    return Recording(
        subject_id="subj",
        exercise_id=exercise,
        cohort="healthy",
        frames=[make_frame(rng, i) for i in range(n_frames)],
        clinical_score=score,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_recording(rng):
    return make_recording(rng, n_frames=10)


@pytest.fixture(scope="session")
def template_recording():
    return generate_template(SynthConfig(frames=30, seed=7))


@pytest.fixture(scope="session")
def tiny_dataset():
    return generate_synthetic(SynthConfig(
        n_healthy=5, n_impaired=3, frames=20, noise_std=0.01,
        length_jitter=3, seed=5))
