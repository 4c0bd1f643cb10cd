"""Skeleton data model, recording file IO, and sequence-length equalization.

A recording is a sequence of skeleton frames, each carrying 25 joint
positions (meters) and 25 unit quaternions (w,x,y,z, relative to the spine
base).  Recordings of one exercise are equalized to a common length by
per-channel linear interpolation over normalized time.

The ``.rec`` file format: UTF-8 text, line 1 is a JSON header
``{"subject", "exercise", "cohort", "score"?}``, every following line is one
frame of 175 comma-separated decimals (75 position values then 100
orientation values, joint-major).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DataError,
    EmptyInputError,
    ParameterError,
    RecordingParseError,
    SchemaError,
)

NUM_JOINTS = 25
POSITION_WIDTH = NUM_JOINTS * 3  # 75
ORIENTATION_WIDTH = NUM_JOINTS * 4  # 100
FRAME_WIDTH = POSITION_WIDTH + ORIENTATION_WIDTH  # 175

QUAT_NORM_TOL = 1e-6
DEFAULT_FRAME_RATE_HZ = 30.0  # Kinect nominal rate, used when timestamps are absent

EXERCISE_IDS = ("E1", "E2", "E3", "E4", "E5")

EXERCISE_NAMES = {
    "E1": "Lifting of Arms",
    "E2": "Lateral tilt of the trunk with arms in extension",
    "E3": "Trunk Rotation",
    "E4": "Pelvic Rotation on the Transverse Plane",
    "E5": "Squatting",
}

COHORTS = ("healthy", "impaired")

JOINT_NAMES = (
    "SpineBase", "SpineMid", "Neck", "Head",
    "ShoulderLeft", "ElbowLeft", "WristLeft", "HandLeft",
    "ShoulderRight", "ElbowRight", "WristRight", "HandRight",
    "HipLeft", "KneeLeft", "AnkleLeft", "FootLeft",
    "HipRight", "KneeRight", "AnkleRight", "FootRight",
    "SpineShoulder", "HandTipLeft", "ThumbLeft", "HandTipRight", "ThumbRight",
)

# 24 bones of the fixed 25-joint skeleton (parent, child).
BONES = (
    (0, 1), (1, 20), (20, 2), (2, 3),
    (20, 4), (4, 5), (5, 6), (6, 7), (7, 21), (6, 22),
    (20, 8), (8, 9), (9, 10), (10, 11), (11, 23), (10, 24),
    (0, 12), (12, 13), (13, 14), (14, 15),
    (0, 16), (16, 17), (17, 18), (18, 19),
)


@dataclass
class SkeletonFrame:
    """One time sample: 25 joint positions plus 25 unit quaternions.

    Orientations are expected to be unit quaternions already; construction
    validates rather than normalizes (the file reader normalizes on ingestion
    so that round-trips through matrices stay exact).
    """

    positions: np.ndarray  # (25, 3) meters
    orientations: np.ndarray  # (25, 4) unit quaternions w,x,y,z
    frame_index: int = 0
    timestamp_ms: float = 0.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.orientations = np.asarray(self.orientations, dtype=np.float64)
        if self.positions.shape != (NUM_JOINTS, 3):
            raise SchemaError(
                f"positions must be ({NUM_JOINTS}, 3), got {self.positions.shape}")
        if self.orientations.shape != (NUM_JOINTS, 4):
            raise SchemaError(
                f"orientations must be ({NUM_JOINTS}, 4), got {self.orientations.shape}")
        if not (np.all(np.isfinite(self.positions)) and np.all(np.isfinite(self.orientations))):
            raise DataError(f"non-finite values in frame {self.frame_index}")
        if self.frame_index < 0:
            raise SchemaError(f"frame_index must be non-negative, got {self.frame_index}")
        if self.timestamp_ms < 0:
            raise SchemaError(f"timestamp_ms must be non-negative, got {self.timestamp_ms}")
        norms = np.linalg.norm(self.orientations, axis=1)
        if np.any(np.abs(norms - 1.0) > QUAT_NORM_TOL):
            worst = int(np.argmax(np.abs(norms - 1.0)))
            raise DataError(
                f"joint {worst} quaternion norm {norms[worst]:.6g} is not unit "
                f"(tolerance {QUAT_NORM_TOL})")

    def flat(self) -> np.ndarray:
        """The frame as one row of 175 values (positions then orientations)."""
        return np.concatenate([self.positions.reshape(-1), self.orientations.reshape(-1)])


def normalize_quaternions(orientations: np.ndarray) -> np.ndarray:
    """Rescale each quaternion row to unit norm.  Zero-norm rows are a DataError."""
    orientations = np.asarray(orientations, dtype=np.float64)
    norms = np.linalg.norm(orientations, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise DataError("cannot normalize a zero quaternion")
    return orientations / norms


@dataclass
class Recording:
    """A subject's full performance of one exercise."""

    subject_id: str
    exercise_id: str
    cohort: str
    frames: list[SkeletonFrame]
    clinical_score: float | None = None  # clinician rating in [0, 50]

    def __post_init__(self):
        if self.exercise_id not in EXERCISE_IDS:
            raise SchemaError(f"unknown exercise_id {self.exercise_id!r}")
        if self.cohort not in COHORTS:
            raise SchemaError(f"unknown cohort {self.cohort!r}")
        if len(self.frames) < 2:
            raise SchemaError(f"recording needs at least 2 frames, got {len(self.frames)}")
        if self.clinical_score is not None and not (0.0 <= self.clinical_score <= 50.0):
            raise DataError(f"clinical_score {self.clinical_score} outside [0, 50]")
        indices = [f.frame_index for f in self.frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise SchemaError("frame_index must be strictly increasing")
        stamps = [f.timestamp_ms for f in self.frames]
        if any(b < a for a, b in zip(stamps, stamps[1:])):
            raise SchemaError("timestamps must be non-decreasing")

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class Dataset:
    """A bag of recordings plus a per-exercise manifest of counts."""

    recordings: list[Recording]
    manifest: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.manifest:
            self.manifest = self._count()

    def _count(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for rec in self.recordings:
            counts[rec.exercise_id] = counts.get(rec.exercise_id, 0) + 1
        return counts

    def for_exercise(self, exercise_id: str) -> list[Recording]:
        return [r for r in self.recordings if r.exercise_id == exercise_id]


# ---------------------------------------------------------------------------
# .rec file reader / writer
# ---------------------------------------------------------------------------

def load_recording(path: str | Path) -> Recording:
    """Read one ``.rec`` file.

    Quaternions are renormalized on ingestion.  Timestamps are synthesized at
    30 Hz (the format carries none).
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise RecordingParseError(f"{path}: empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise RecordingParseError(f"{path}: line 1: invalid JSON header: {exc}") from exc
    for key in ("subject", "exercise", "cohort"):
        if key not in header:
            raise RecordingParseError(f"{path}: line 1: header missing field {key!r}")

    frames = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != FRAME_WIDTH:
            raise SchemaError(
                f"{path}: line {lineno}: expected {FRAME_WIDTH} values "
                f"({NUM_JOINTS} joints), got {len(parts)}")
        try:
            row = np.array([float(p) for p in parts], dtype=np.float64)
        except ValueError as exc:
            raise RecordingParseError(f"{path}: line {lineno}: {exc}") from exc
        if not np.all(np.isfinite(row)):
            raise DataError(f"{path}: line {lineno}: non-finite value")
        positions = row[:POSITION_WIDTH].reshape(NUM_JOINTS, 3)
        orientations = normalize_quaternions(row[POSITION_WIDTH:].reshape(NUM_JOINTS, 4))
        index = len(frames)
        frames.append(SkeletonFrame(
            positions=positions,
            orientations=orientations,
            frame_index=index,
            timestamp_ms=index * 1000.0 / DEFAULT_FRAME_RATE_HZ,
        ))
    if len(frames) < 2:
        raise SchemaError(f"{path}: recording needs at least 2 frames, got {len(frames)}")

    score = header.get("score")
    return Recording(
        subject_id=str(header["subject"]),
        exercise_id=str(header["exercise"]),
        cohort=str(header["cohort"]),
        frames=frames,
        clinical_score=float(score) if score is not None else None,
    )


def save_recording(path: str | Path, recording: Recording) -> None:
    """Write a ``.rec`` file.  Values use repr precision, so finite data round-trips exactly."""
    header: dict = {
        "subject": recording.subject_id,
        "exercise": recording.exercise_id,
        "cohort": recording.cohort,
    }
    if recording.clinical_score is not None:
        header["score"] = recording.clinical_score
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for frame in recording.frames:
            fh.write(",".join(repr(float(v)) for v in frame.flat()) + "\n")


def save_dataset(path: str | Path, dataset: Dataset) -> None:
    """Write a dataset bundle as JSON (header fields plus raw frame rows)."""
    payload = {
        "version": 1,
        "manifest": dataset.manifest,
        "recordings": [
            {
                "subject": rec.subject_id,
                "exercise": rec.exercise_id,
                "cohort": rec.cohort,
                "score": rec.clinical_score,
                "frames": [[float(v) for v in f.flat()] for f in rec.frames],
            }
            for rec in dataset.recordings
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_dataset(path: str | Path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    recordings = []
    for entry in payload["recordings"]:
        frames = []
        for i, row in enumerate(entry["frames"]):
            row = np.asarray(row, dtype=np.float64)
            if row.shape != (FRAME_WIDTH,):
                raise SchemaError(f"{path}: frame {i}: expected {FRAME_WIDTH} values")
            frames.append(SkeletonFrame(
                positions=row[:POSITION_WIDTH].reshape(NUM_JOINTS, 3),
                orientations=normalize_quaternions(
                    row[POSITION_WIDTH:].reshape(NUM_JOINTS, 4)),
                frame_index=i,
                timestamp_ms=i * 1000.0 / DEFAULT_FRAME_RATE_HZ,
            ))
        recordings.append(Recording(
            subject_id=entry["subject"],
            exercise_id=entry["exercise"],
            cohort=entry["cohort"],
            frames=frames,
            clinical_score=entry.get("score"),
        ))
    return Dataset(recordings=recordings)


# ---------------------------------------------------------------------------
# Matrix views
# ---------------------------------------------------------------------------

def to_matrix(recording: Recording, content: str = "both") -> np.ndarray:
    """Flatten a recording to an (m, 75|100|175) matrix in fixed joint order."""
    if content == "positions":
        return np.stack([f.positions.reshape(-1) for f in recording.frames])
    if content == "orientations":
        return np.stack([f.orientations.reshape(-1) for f in recording.frames])
    if content == "both":
        return np.stack([f.flat() for f in recording.frames])
    raise ParameterError(f"content must be positions|orientations|both, got {content!r}")


def frames_from_matrix(matrix: np.ndarray) -> list[SkeletonFrame]:
    """Rebuild frames from an (m, 175) matrix.  Exact inverse of ``to_matrix(.., "both")``.

    No renormalization happens here; rows must already satisfy the frame
    invariants.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != FRAME_WIDTH:
        raise SchemaError(f"expected (m, {FRAME_WIDTH}) matrix, got {matrix.shape}")
    return [
        SkeletonFrame(
            positions=row[:POSITION_WIDTH].reshape(NUM_JOINTS, 3),
            orientations=row[POSITION_WIDTH:].reshape(NUM_JOINTS, 4),
            frame_index=i,
            timestamp_ms=i * 1000.0 / DEFAULT_FRAME_RATE_HZ,
        )
        for i, row in enumerate(matrix)
    ]


# ---------------------------------------------------------------------------
# Length equalization
# ---------------------------------------------------------------------------

def resample_channels(matrix: np.ndarray, target_len: int) -> np.ndarray:
    """Piecewise-linear resample of each column over normalized time [0, 1].

    First and last rows are preserved exactly; a same-length resample is the
    identity (the time grids coincide bit-for-bit).
    """
    m = matrix.shape[0]
    if m < 2:
        raise EmptyInputError("need at least 2 frames to resample")
    if target_len < 2:
        raise EmptyInputError("target length must be at least 2")
    if target_len == m:
        return matrix.copy()
    src_t = np.arange(m, dtype=np.float64) / (m - 1)
    dst_t = np.arange(target_len, dtype=np.float64) / (target_len - 1)
    out = np.empty((target_len, matrix.shape[1]), dtype=np.float64)
    for col in range(matrix.shape[1]):
        out[:, col] = np.interp(dst_t, src_t, matrix[:, col])
    out[0] = matrix[0]
    out[-1] = matrix[-1]
    return out


def mean_frame_count(lengths: list[int]) -> int:
    """Round-half-up mean of the original frame counts."""
    return int(math.floor(sum(lengths) / len(lengths) + 0.5))


def equalize_lengths(dataset: Dataset, exercise_id: str) -> Dataset:
    """Resample every recording of one exercise to the mean frame count.

    Each of the 175 scalar channels is interpolated linearly over normalized
    time; quaternions are renormalized afterwards.  Recordings of other
    exercises pass through untouched.
    """
    targets = dataset.for_exercise(exercise_id)
    if not targets:
        raise EmptyInputError(f"no recordings for exercise {exercise_id!r}")
    target_len = mean_frame_count([len(r) for r in targets])

    out = []
    for rec in dataset.recordings:
        if rec.exercise_id != exercise_id:
            out.append(rec)
            continue
        resampled = resample_channels(to_matrix(rec, "both"), target_len)
        resampled[:, POSITION_WIDTH:] = normalize_quaternions(
            resampled[:, POSITION_WIDTH:].reshape(target_len, NUM_JOINTS, 4)
        ).reshape(target_len, ORIENTATION_WIDTH)
        out.append(Recording(
            subject_id=rec.subject_id,
            exercise_id=rec.exercise_id,
            cohort=rec.cohort,
            frames=frames_from_matrix(resampled),
            clinical_score=rec.clinical_score,
        ))
    return Dataset(recordings=out)
