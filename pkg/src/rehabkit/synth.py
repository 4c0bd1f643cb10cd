"""Synthetic exercise recordings with known ground-truth scores.

Stands in for clinical corpora that cannot be redistributed.  A template
performance is built from smooth multi-sinusoid joint trajectories (position
displacements and quaternion rotations at mixed harmonics of one movement
phase, so extracted features trace a curved low-dimensional manifold).
Healthy recordings add small smooth noise; impaired recordings attenuate the
movement amplitude, shift its phase, superimpose tremor, or jitter the
per-frame sampling times.  Every impairment feeds a known monotone-decreasing
score function, so learned scorers can be validated against ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .skeleton_io import NUM_JOINTS, Dataset, Recording, SkeletonFrame

# Upright rest pose, meters, y up, camera-facing at z = 2.5.
REST_POSE = np.array([
    [0.00, 0.95, 2.50],   # 0  SpineBase
    [0.00, 1.20, 2.50],   # 1  SpineMid
    [0.00, 1.45, 2.50],   # 2  Neck
    [0.00, 1.58, 2.50],   # 3  Head
    [-0.18, 1.40, 2.50],  # 4  ShoulderLeft
    [-0.24, 1.15, 2.50],  # 5  ElbowLeft
    [-0.26, 0.92, 2.50],  # 6  WristLeft
    [-0.27, 0.85, 2.50],  # 7  HandLeft
    [0.18, 1.40, 2.50],   # 8  ShoulderRight
    [0.24, 1.15, 2.50],   # 9  ElbowRight
    [0.26, 0.92, 2.50],   # 10 WristRight
    [0.27, 0.85, 2.50],   # 11 HandRight
    [-0.10, 0.92, 2.50],  # 12 HipLeft
    [-0.11, 0.52, 2.50],  # 13 KneeLeft
    [-0.12, 0.12, 2.50],  # 14 AnkleLeft
    [-0.12, 0.05, 2.62],  # 15 FootLeft
    [0.10, 0.92, 2.50],   # 16 HipRight
    [0.11, 0.52, 2.50],   # 17 KneeRight
    [0.12, 0.12, 2.50],   # 18 AnkleRight
    [0.12, 0.05, 2.62],   # 19 FootRight
    [0.00, 1.38, 2.50],   # 20 SpineShoulder
    [-0.28, 0.78, 2.50],  # 21 HandTipLeft
    [-0.24, 0.83, 2.48],  # 22 ThumbLeft
    [0.28, 0.78, 2.50],   # 23 HandTipRight
    [0.24, 0.83, 2.48],   # 24 ThumbRight
])

# Position motion: joint -> list of (frequency multiple, xyz amplitude, phase).
# Arms carry the base harmonic, elbows add a second, trunk sways at the third,
# legs bounce slightly; the mix keeps extracted features off any low-rank
# linear subspace while the intrinsic dimension stays at one phase variable.
_POSITION_MOTION: dict[int, list[tuple[float, tuple[float, float, float], float]]] = {
    6: [(1.0, (0.02, 0.36, 0.02), 0.0), (2.0, (0.0, 0.0, 0.10), 0.9)],     # WristLeft
    10: [(1.0, (-0.02, 0.36, 0.02), 0.0), (2.0, (0.0, 0.0, 0.10), 2.5)],   # WristRight
    7: [(1.0, (0.02, 0.38, 0.02), 0.1), (2.0, (0.0, 0.0, 0.11), 0.9)],     # HandLeft
    11: [(1.0, (-0.02, 0.38, 0.02), 0.1), (2.0, (0.0, 0.0, 0.11), 2.5)],   # HandRight
    21: [(1.0, (0.02, 0.39, 0.02), 0.1), (2.0, (0.0, 0.0, 0.11), 0.9)],    # HandTipLeft
    23: [(1.0, (-0.02, 0.39, 0.02), 0.1), (2.0, (0.0, 0.0, 0.11), 2.5)],   # HandTipRight
    22: [(1.0, (0.02, 0.38, 0.02), 0.1), (2.0, (0.0, 0.0, 0.10), 0.9)],    # ThumbLeft
    24: [(1.0, (-0.02, 0.38, 0.02), 0.1), (2.0, (0.0, 0.0, 0.10), 2.5)],   # ThumbRight
    5: [(1.0, (0.01, 0.18, 0.01), 0.2), (2.0, (0.12, 0.0, 0.04), 0.4)],    # ElbowLeft
    9: [(1.0, (-0.01, 0.18, 0.01), 0.2), (2.0, (-0.12, 0.0, 0.04), 1.9)],  # ElbowRight
    4: [(1.0, (0.0, 0.05, 0.0), 0.3), (2.0, (0.03, 0.0, 0.0), 1.1)],       # ShoulderLeft
    8: [(1.0, (0.0, 0.05, 0.0), 0.3), (2.0, (-0.03, 0.0, 0.0), 2.2)],      # ShoulderRight
    1: [(3.0, (0.025, 0.0, 0.015), 0.7)],                     # SpineMid
    20: [(3.0, (0.035, 0.0, 0.02), 0.7)],                     # SpineShoulder
    2: [(3.0, (0.04, 0.0, 0.02), 0.8)],                       # Neck
    3: [(3.0, (0.045, 0.0, 0.022), 0.8)],                     # Head
    13: [(2.0, (0.0, 0.04, 0.0), 1.5)],                       # KneeLeft
    17: [(2.0, (0.0, 0.04, 0.0), 1.5)],                       # KneeRight
}

# Orientation motion: joint -> (frequency multiple, rotation axis, max angle rad, phase).
_ORIENTATION_MOTION: dict[int, tuple[float, tuple[float, float, float], float, float]] = {
    4: (1.0, (0.0, 0.0, 1.0), 0.9, 0.0),
    5: (1.0, (0.0, 0.0, 1.0), 0.7, 0.3),
    6: (1.0, (0.0, 0.0, 1.0), 0.5, 0.5),
    8: (1.0, (0.0, 0.0, -1.0), 0.9, 0.0),
    9: (1.0, (0.0, 0.0, -1.0), 0.7, 0.3),
    10: (1.0, (0.0, 0.0, -1.0), 0.5, 0.5),
    1: (3.0, (0.0, 1.0, 0.0), 0.25, 0.7),
    20: (3.0, (0.0, 1.0, 0.0), 0.3, 0.7),
    13: (2.0, (1.0, 0.0, 0.0), 0.15, 1.5),
    17: (2.0, (1.0, 0.0, 0.0), 0.15, 1.5),
}

# Deviation weights for the ground-truth score function.
_DEV_PHASE_PER_RAD = 0.5 / np.pi
_DEV_TREMOR_SPAN = 0.55  # tremor at its configured maximum contributes this much
_DEV_TIME_JITTER_SPAN = 0.6  # likewise for sampling-time jitter
_DEV_WEAKNESS_SPAN = 0.6  # a full-amplitude dropout burst contributes this much

_TREMOR_CYCLES = 9.0  # high-frequency band, cycles per recording


@dataclass
class SynthConfig:
    """Generator knobs; every draw derives from ``seed``."""

    exercise: str = "E1"
    n_healthy: int = 20
    n_impaired: int = 10
    frames: int = 48
    cycles: float = 1.0  # base-harmonic repetitions per recording
    noise_std: float = 0.01  # smooth healthy wiggle, meters / quaternion-angle rad
    sensor_noise_max: float = 0.0  # high-frequency sensor ripple on every recording
    attenuation_range: tuple[float, float] = (0.3, 1.0)
    phase_jitter_std: float = 0.0  # radians, whole-recording phase shift
    tremor_max: float = 0.0  # meters, high-frequency superimposed oscillation
    tremor_burst: bool = False  # confine tremor to one random quarter of the recording
    weakness_burst_max: float = 0.0  # max amplitude-drop fraction inside one random quarter
    time_jitter_max: float = 0.0  # phase s.d. of per-frame sampling-time noise
    length_jitter: int = 0  # +- frames of per-recording length variation
    seed: int = 0

    def __post_init__(self):
        if self.frames < 4:
            raise ParameterError(f"need at least 4 frames, got {self.frames}")
        lo, hi = self.attenuation_range
        if not (0.0 <= lo <= hi <= 1.0):
            raise ParameterError(f"attenuation range must be within [0,1], got {self.attenuation_range}")


def deviation_score(deviation: float) -> float:
    """Known ground-truth score: 50 at zero deviation, linearly down to 0."""
    return 50.0 * max(0.0, 1.0 - deviation)


@dataclass
class _Impairment:
    attenuation: float = 1.0  # alpha: 1 = full movement
    phase_shift: float = 0.0
    tremor: float = 0.0
    weakness: float = 0.0  # amplitude-drop fraction inside the burst window
    time_jitter: float = 0.0

    def deviation(self, cfg: SynthConfig) -> float:
        d = (1.0 - self.attenuation) + _DEV_PHASE_PER_RAD * abs(self.phase_shift)
        if cfg.tremor_max > 0:
            d += _DEV_TREMOR_SPAN * self.tremor / cfg.tremor_max
        d += _DEV_WEAKNESS_SPAN * self.weakness
        if cfg.time_jitter_max > 0:
            d += _DEV_TIME_JITTER_SPAN * self.time_jitter / cfg.time_jitter_max
        return d


def _axis_angle_quat(axis: tuple[float, float, float], angle: np.ndarray) -> np.ndarray:
    """Unit quaternions (w, x, y, z) for rotation by ``angle`` about a fixed axis."""
    u = np.asarray(axis, dtype=np.float64)
    u = u / np.linalg.norm(u)
    half = angle / 2.0
    quat = np.empty(angle.shape + (4,))
    quat[..., 0] = np.cos(half)
    quat[..., 1:] = np.sin(half)[..., None] * u
    return quat


def _smooth_noise(rng: np.random.Generator, base: np.ndarray,
                  shape: tuple[int, ...], std: float) -> np.ndarray:
    """Two random-phase harmonics per channel: small but smooth over time."""
    m = base.shape[0]
    a1 = rng.normal(0.0, std, size=shape)
    a2 = rng.normal(0.0, std / 2, size=shape)
    p1 = rng.uniform(0, 2 * np.pi, size=shape)
    p2 = rng.uniform(0, 2 * np.pi, size=shape)
    b = base.reshape((m,) + (1,) * len(shape))
    return a1 * np.sin(b + p1) + a2 * np.sin(2 * b + p2)


def _render_frames(cfg: SynthConfig, m: int, imp: _Impairment,
                   rng: np.random.Generator | None) -> list[SkeletonFrame]:
    """Evaluate the motion model at m time steps under one impairment."""
    tau = np.linspace(0.0, 1.0, m)
    if imp.time_jitter > 0 and rng is not None:
        tau = tau.copy()
        tau[1:-1] += rng.normal(0.0, imp.time_jitter, size=m - 2)  # endpoints anchored
    base = 2.0 * np.pi * cfg.cycles * tau
    noisy = cfg.noise_std > 0 and rng is not None

    def burst_mask() -> np.ndarray:
        # one burst covering a quarter of the recording, position random
        width = max(2, m // 4)
        start = int(rng.integers(0, m - width + 1))
        mask = np.zeros(m)
        mask[start:start + width] = 1.0
        return mask

    tremor_mask = np.ones(m)
    if imp.tremor > 0 and rng is not None and cfg.tremor_burst:
        tremor_mask = burst_mask()

    # Per-frame amplitude multiplier: the global attenuation, further dropped
    # inside one random window when a weakness burst is present.
    amp_scale = np.full(m, imp.attenuation)
    if imp.weakness > 0 and rng is not None:
        amp_scale = imp.attenuation * (1.0 - imp.weakness * burst_mask())

    # One shared ripple waveform per recording (coherent across joints): the
    # sensor floor plus any tremor stay a one-dimensional signal, so trained
    # encoders keep a latent channel for that band instead of discarding it.
    ripple = np.zeros(m)
    if rng is not None:
        ripple_wave = np.sin(2 * np.pi * _TREMOR_CYCLES * tau + rng.uniform(0, 2 * np.pi))
        if cfg.sensor_noise_max > 0:
            ripple += rng.uniform(0.0, cfg.sensor_noise_max) * ripple_wave
        if imp.tremor > 0:
            ripple += imp.tremor * tremor_mask * ripple_wave

    positions = np.broadcast_to(REST_POSE, (m, NUM_JOINTS, 3)).copy()
    for joint, components in _POSITION_MOTION.items():
        for freq, amplitude, phase in components:
            wave = np.sin(freq * base + phase + imp.phase_shift)
            positions[:, joint, :] += np.outer(amp_scale * wave, amplitude)
        positions[:, joint, 1] += ripple
    if noisy:
        moving = sorted(_POSITION_MOTION)
        positions[:, moving, :] += _smooth_noise(rng, base, (len(moving), 3), cfg.noise_std)

    orientations = np.zeros((m, NUM_JOINTS, 4))
    orientations[:, :, 0] = 1.0
    for joint, (freq, axis, max_angle, phase) in _ORIENTATION_MOTION.items():
        angle = amp_scale * max_angle * np.sin(freq * base + phase + imp.phase_shift)
        if noisy:
            angle = angle + _smooth_noise(rng, base, (), cfg.noise_std)
        orientations[:, joint, :] = _axis_angle_quat(axis, angle)
    orientations /= np.linalg.norm(orientations, axis=2, keepdims=True)

    return [
        SkeletonFrame(positions=positions[i], orientations=orientations[i],
                      frame_index=i, timestamp_ms=i * 1000.0 / 30.0)
        for i in range(m)
    ]


def generate_template(cfg: SynthConfig) -> Recording:
    """The noiseless reference performance (score 50 by construction)."""
    frames = _render_frames(cfg, cfg.frames, _Impairment(), rng=None)
    return Recording(subject_id="template", exercise_id=cfg.exercise,
                     cohort="healthy", frames=frames, clinical_score=50.0)


def generate_synthetic(cfg: SynthConfig) -> Dataset:
    """Healthy + impaired cohorts with scores from the known score function."""
    rng = np.random.default_rng(cfg.seed)
    recordings: list[Recording] = []

    def sample_length() -> int:
        if cfg.length_jitter == 0:
            return cfg.frames
        return cfg.frames + int(rng.integers(-cfg.length_jitter, cfg.length_jitter + 1))

    for i in range(cfg.n_healthy):
        # healthy deviation reflects only the smooth noise magnitude
        deviation = float(rng.uniform(0.0, 2.0 * cfg.noise_std))
        frames = _render_frames(cfg, sample_length(), _Impairment(), rng)
        recordings.append(Recording(
            subject_id=f"H{i:03d}", exercise_id=cfg.exercise, cohort="healthy",
            frames=frames, clinical_score=deviation_score(deviation)))

    for i in range(cfg.n_impaired):
        lo, hi = cfg.attenuation_range
        imp = _Impairment(
            attenuation=float(rng.uniform(lo, hi)),
            phase_shift=float(rng.normal(0.0, cfg.phase_jitter_std)) if cfg.phase_jitter_std > 0 else 0.0,
            tremor=float(rng.uniform(0.0, cfg.tremor_max)) if cfg.tremor_max > 0 else 0.0,
            weakness=float(rng.uniform(0.0, cfg.weakness_burst_max)) if cfg.weakness_burst_max > 0 else 0.0,
            time_jitter=float(rng.uniform(0.0, cfg.time_jitter_max)) if cfg.time_jitter_max > 0 else 0.0,
        )
        frames = _render_frames(cfg, sample_length(), imp, rng)
        recordings.append(Recording(
            subject_id=f"S{i:03d}", exercise_id=cfg.exercise, cohort="impaired",
            frames=frames, clinical_score=deviation_score(imp.deviation(cfg))))

    return Dataset(recordings=recordings)
