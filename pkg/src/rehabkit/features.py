"""Per-frame feature extraction and context windowing.

Features are clinically motivated per-frame quantities (joint angles,
pairwise distances, elevations relative to the spine base, trunk tilt,
quaternion components).  The exact list per exercise is configuration, loaded
from a versioned YAML file, so a clinic's own definitions can be dropped in
without code changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import DataError, ParameterError, SchemaError
from .skeleton_io import NUM_JOINTS, Recording

AXES = {"x": 0, "y": 1, "z": 2}
QUAT_COMPONENTS = {"w": 0, "x": 1, "y": 2, "z": 3}

# Joint indices used by the default specs (fixed 25-joint layout).
_SPINE_BASE, _SPINE_MID, _HEAD, _SPINE_SHOULDER = 0, 1, 3, 20
_SHOULDER_L, _ELBOW_L, _WRIST_L = 4, 5, 6
_SHOULDER_R, _ELBOW_R, _WRIST_R = 8, 9, 10
_HIP_L, _KNEE_L, _ANKLE_L = 12, 13, 14
_HIP_R, _KNEE_R, _ANKLE_R = 16, 17, 18

_DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class FeatureDef:
    """One per-frame feature.

    kind:
      joint_angle(a, b, c)       angle at b between segments b->a and b->c, radians
      pairwise_distance(a, b)    Euclidean distance, meters
      axis_elevation(a, axis)    position of joint a along an axis, relative to the spine base
      trunk_tilt                 angle between the spine segment and vertical
      orientation_component(j,c) one quaternion component of joint j
    """

    kind: str
    joints: tuple[int, ...] = ()
    axis: str = "y"
    component: str = "w"

    def __post_init__(self):
        expected = {"joint_angle": 3, "pairwise_distance": 2,
                    "axis_elevation": 1, "trunk_tilt": 0, "orientation_component": 1}
        if self.kind not in expected:
            raise ParameterError(f"unknown feature kind {self.kind!r}")
        if len(self.joints) != expected[self.kind]:
            raise ParameterError(
                f"{self.kind} takes {expected[self.kind]} joints, got {len(self.joints)}")
        if any(not (0 <= j < NUM_JOINTS) for j in self.joints):
            raise ParameterError(f"joint index out of range in {self}")
        if self.kind == "axis_elevation" and self.axis not in AXES:
            raise ParameterError(f"axis must be one of {sorted(AXES)}, got {self.axis!r}")
        if self.kind == "orientation_component" and self.component not in QUAT_COMPONENTS:
            raise ParameterError(f"component must be one of wxyz, got {self.component!r}")


@dataclass
class FeatureSpec:
    """The ordered feature list for one exercise."""

    exercise_id: str
    features: list[FeatureDef]
    version: int = 1

    def __post_init__(self):
        if not self.features:
            raise ParameterError("feature list must not be empty")

    @property
    def width(self) -> int:
        return len(self.features)


@dataclass
class FeatureSequence:
    """M x K matrix of extracted features for one recording."""

    values: np.ndarray  # (M, K)
    exercise_id: str
    subject_id: str
    score: float | None = None  # scaled to [0, 1]
    degenerate: np.ndarray = field(default=None)  # (M,) bool warning flags

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise SchemaError(f"feature values must be 2-D, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DataError("non-finite feature values")
        if self.degenerate is None:
            self.degenerate = np.zeros(self.values.shape[0], dtype=bool)


def scale_score(raw: float) -> float:
    """Map a clinician score in [0, 50] onto [0, 1]."""
    if not (0.0 <= raw <= 50.0):
        raise DataError(f"score {raw} outside [0, 50]")
    return raw / 50.0


def _angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Angle at b over all frames; degenerate (coincident) joints yield 0 + flag."""
    u = a - b
    v = c - b
    nu = np.linalg.norm(u, axis=1)
    nv = np.linalg.norm(v, axis=1)
    bad = (nu < _DEGENERATE_EPS) | (nv < _DEGENERATE_EPS)
    denom = np.where(bad, 1.0, nu * nv)
    cos = np.clip(np.einsum("ij,ij->i", u, v) / denom, -1.0, 1.0)
    angle = np.where(bad, 0.0, np.arccos(cos))
    return angle, bad


def extract_features(recording: Recording, spec: FeatureSpec) -> FeatureSequence:
    """Compute the spec's features for every frame (stateless per frame)."""
    positions = np.stack([f.positions for f in recording.frames])  # (M, 25, 3)
    orientations = np.stack([f.orientations for f in recording.frames])  # (M, 25, 4)
    m = positions.shape[0]
    columns = np.empty((m, spec.width), dtype=np.float64)
    degenerate = np.zeros(m, dtype=bool)

    for k, feat in enumerate(spec.features):
        if feat.kind == "joint_angle":
            a, b, c = feat.joints
            columns[:, k], bad = _angle(positions[:, a], positions[:, b], positions[:, c])
            degenerate |= bad
        elif feat.kind == "pairwise_distance":
            a, b = feat.joints
            columns[:, k] = np.linalg.norm(positions[:, a] - positions[:, b], axis=1)
        elif feat.kind == "axis_elevation":
            (a,) = feat.joints
            axis = AXES[feat.axis]
            columns[:, k] = positions[:, a, axis] - positions[:, _SPINE_BASE, axis]
        elif feat.kind == "trunk_tilt":
            up = np.zeros((m, 3))
            up[:, 1] = 1.0
            columns[:, k], bad = _angle(
                positions[:, _SPINE_SHOULDER], positions[:, _SPINE_BASE],
                positions[:, _SPINE_BASE] + up)
            degenerate |= bad
        else:  # orientation_component
            (j,) = feat.joints
            columns[:, k] = orientations[:, j, QUAT_COMPONENTS[feat.component]]

    score = None
    if recording.clinical_score is not None:
        score = scale_score(recording.clinical_score)
    return FeatureSequence(
        values=columns,
        exercise_id=recording.exercise_id,
        subject_id=recording.subject_id,
        score=score,
        degenerate=degenerate,
    )


def context_window(seq: np.ndarray, window: int) -> np.ndarray:
    """Concatenate past and future rows onto each row.

    For odd ``window`` W, row t becomes the concatenation of rows
    t-(W-1)/2 .. t+(W-1)/2, replicate-padded at the sequence edges.
    W=1 returns the input unchanged.
    """
    if window < 1 or window % 2 == 0:
        raise ParameterError(f"context window must be odd and positive, got {window}")
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 2 or seq.shape[0] < 1:
        raise SchemaError(f"expected a non-empty (M, D) matrix, got shape {seq.shape}")
    if window == 1:
        return seq.copy()
    m = seq.shape[0]
    half = (window - 1) // 2
    offsets = np.arange(-half, half + 1)
    idx = np.clip(np.arange(m)[:, None] + offsets[None, :], 0, m - 1)  # (M, W)
    return seq[idx].reshape(m, window * seq.shape[1])


# ---------------------------------------------------------------------------
# Feature scaling (per-channel standardization used ahead of model training)
# ---------------------------------------------------------------------------

@dataclass
class FeatureScaler:
    """Per-channel standardization fitted on training data."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, matrices: list[np.ndarray]) -> "FeatureScaler":
        stacked = np.concatenate([np.asarray(m) for m in matrices], axis=0)
        std = stacked.std(axis=0)
        std = np.where(std < 1e-9, 1.0, std)
        return cls(mean=stacked.mean(axis=0), std=std)

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        return (np.asarray(matrix) - self.mean) / self.std

    def to_dict(self) -> dict:
        return {"mean": [float(v) for v in self.mean], "std": [float(v) for v in self.std]}

    @classmethod
    def from_dict(cls, payload: dict) -> "FeatureScaler":
        return cls(mean=np.asarray(payload["mean"], dtype=np.float64),
                   std=np.asarray(payload["std"], dtype=np.float64))


# ---------------------------------------------------------------------------
# Spec configuration
# ---------------------------------------------------------------------------

def default_feature_specs() -> dict[str, FeatureSpec]:
    """Built-in per-exercise feature lists (same content as configs/features.yaml)."""
    specs = {
        "E1": [  # arm lifting: shoulder/elbow angles plus wrist elevations
            FeatureDef("joint_angle", (_ELBOW_L, _SHOULDER_L, _HIP_L)),
            FeatureDef("joint_angle", (_ELBOW_R, _SHOULDER_R, _HIP_R)),
            FeatureDef("joint_angle", (_SHOULDER_L, _ELBOW_L, _WRIST_L)),
            FeatureDef("joint_angle", (_SHOULDER_R, _ELBOW_R, _WRIST_R)),
            FeatureDef("axis_elevation", (_WRIST_L,), axis="y"),
            FeatureDef("axis_elevation", (_WRIST_R,), axis="y"),
            FeatureDef("trunk_tilt"),
        ],
        "E2": [  # lateral trunk tilt with arms extended
            FeatureDef("trunk_tilt"),
            FeatureDef("joint_angle", (_SHOULDER_L, _ELBOW_L, _WRIST_L)),
            FeatureDef("joint_angle", (_SHOULDER_R, _ELBOW_R, _WRIST_R)),
            FeatureDef("axis_elevation", (_HEAD,), axis="x"),
            FeatureDef("pairwise_distance", (_WRIST_L, _HIP_L)),
            FeatureDef("pairwise_distance", (_WRIST_R, _HIP_R)),
        ],
        "E3": [  # trunk rotation: cross shoulder-hip distances + spine orientation
            FeatureDef("pairwise_distance", (_SHOULDER_L, _HIP_R)),
            FeatureDef("pairwise_distance", (_SHOULDER_R, _HIP_L)),
            FeatureDef("orientation_component", (_SPINE_MID,), component="y"),
            FeatureDef("orientation_component", (_SPINE_MID,), component="w"),
            FeatureDef("trunk_tilt"),
        ],
        "E4": [  # pelvic rotation on the transverse plane
            FeatureDef("orientation_component", (_SPINE_BASE,), component="y"),
            FeatureDef("orientation_component", (_SPINE_BASE,), component="w"),
            FeatureDef("pairwise_distance", (_HIP_L, _SHOULDER_R)),
            FeatureDef("pairwise_distance", (_HIP_R, _SHOULDER_L)),
        ],
        "E5": [  # squatting: knee angles + pelvis drop + trunk posture
            FeatureDef("joint_angle", (_HIP_L, _KNEE_L, _ANKLE_L)),
            FeatureDef("joint_angle", (_HIP_R, _KNEE_R, _ANKLE_R)),
            FeatureDef("axis_elevation", (_SPINE_MID,), axis="y"),
            FeatureDef("trunk_tilt"),
        ],
    }
    return {ex: FeatureSpec(exercise_id=ex, features=defs) for ex, defs in specs.items()}


def load_feature_specs(path: str | Path) -> dict[str, FeatureSpec]:
    """Load per-exercise feature specs from a versioned YAML config."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict) or "exercises" not in doc:
        raise ParameterError(f"{path}: expected a mapping with an 'exercises' key")
    version = int(doc.get("version", 1))
    specs = {}
    for exercise_id, entry in doc["exercises"].items():
        defs = []
        for item in entry["features"]:
            defs.append(FeatureDef(
                kind=item["kind"],
                joints=tuple(item.get("joints", ())),
                axis=item.get("axis", "y"),
                component=item.get("component", "w"),
            ))
        specs[exercise_id] = FeatureSpec(exercise_id=exercise_id, features=defs,
                                         version=version)
    return specs


def save_feature_specs(path: str | Path, specs: dict[str, FeatureSpec]) -> None:
    def encode(fd: FeatureDef) -> dict:
        item: dict = {"kind": fd.kind}
        if fd.joints:
            item["joints"] = list(fd.joints)
        if fd.kind == "axis_elevation":
            item["axis"] = fd.axis
        if fd.kind == "orientation_component":
            item["component"] = fd.component
        return item

    doc = {
        "version": max((s.version for s in specs.values()), default=1),
        "exercises": {
            ex: {"features": [encode(fd) for fd in spec.features]}
            for ex, spec in specs.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)
