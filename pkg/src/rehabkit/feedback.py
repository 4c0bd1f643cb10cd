"""Live per-joint dissimilarity against a template, graded into colors.

Each live frame is compared frame-wise against the template at a cursor that
advances by one per step and wraps at the end (continuous repetition).  The
per-joint dissimilarity is the L1 distance over the joint's 4 quaternion
components; no temporal alignment is attempted, so a correct-but-slow
performance will intentionally show mismatch.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, StateError
from .skeleton_io import NUM_JOINTS, Recording, SkeletonFrame


def load_grading_scale(path) -> "GradingScale":
    """Read thresholds and class count from a YAML config."""
    import yaml
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    return GradingScale(
        t_green=float(doc.get("t_green", 0.05)),
        t_red=float(doc.get("t_red", 0.6)),
        num_classes=int(doc.get("num_classes", 5)),
    )


@dataclass(frozen=True)
class GradingScale:
    """Linear green-to-red ramp over dissimilarity values.

    Values at or below ``t_green`` map to class 0 (green), values at or above
    ``t_red`` saturate at the last class (red); between the two the class
    index grows linearly.
    """

    t_green: float = 0.05
    t_red: float = 0.6
    num_classes: int = 5

    def __post_init__(self):
        if not (self.t_green > 0 and self.t_red > self.t_green):
            raise ParameterError(
                f"thresholds must satisfy 0 < t_green < t_red, got "
                f"({self.t_green}, {self.t_red})")
        if self.num_classes < 3:
            raise ParameterError(f"need at least 3 classes, got {self.num_classes}")


def class_colors(scale: GradingScale) -> np.ndarray:
    """RGB triples for each class: green through yellow to red."""
    c = scale.num_classes
    colors = np.empty((c, 3), dtype=np.uint8)
    for i in range(c):
        f = i / (c - 1)
        if f <= 0.5:
            u = 2.0 * f
            colors[i] = (round(255 * u), 255, 0)
        else:
            u = 2.0 * f - 1.0
            colors[i] = (255, round(255 * (1.0 - u)), 0)
    return colors


def joint_dissimilarity(live: SkeletonFrame, template: SkeletonFrame,
                        sign_align: bool = False) -> np.ndarray:
    """Per-joint L1 distance over the 4 quaternion components.

    ``sign_align`` optionally flips each live quaternion onto the same
    hemisphere as the template before differencing (q and -q encode the same
    rotation); off by default, matching the literal component comparison.
    """
    live_q = live.orientations
    if sign_align:
        dots = np.einsum("ij,ij->i", live_q, template.orientations)
        live_q = live_q * np.where(dots < 0, -1.0, 1.0)[:, None]
    return np.abs(live_q - template.orientations).sum(axis=1)


def grade(t_values: np.ndarray, scale: GradingScale) -> np.ndarray:
    """Map dissimilarity values to class indices on the linear ramp."""
    t = np.asarray(t_values, dtype=np.float64)
    span = scale.t_red - scale.t_green
    # the 1e-9 guard keeps exact ramp boundaries from flooring one class low
    ramp = np.floor((t - scale.t_green) / span * (scale.num_classes - 1) + 1e-9)
    classes = np.clip(ramp, 0, scale.num_classes - 1).astype(np.int64)
    classes[t <= scale.t_green] = 0
    classes[t >= scale.t_red] = scale.num_classes - 1
    return classes


@dataclass
class FeedbackFrame:
    """Grading of one live frame: 25 dissimilarities plus their colors."""

    frame_index: int
    t_values: np.ndarray  # (25,)
    classes: np.ndarray  # (25,) int class indices
    colors: np.ndarray  # (25, 3) uint8 RGB
    overall: float  # mean of t_values


class FeedbackSession:
    """Stateful comparison of one live stream against a template.

    The template cursor starts at frame 0, advances by one per step and wraps
    around, supporting repeated performance.  Sessions are single-owner: one
    live stream, strictly sequential stepping.
    """

    def __init__(self, template: Recording, scale: GradingScale | None = None,
                 sign_align: bool = False):
        if len(template.frames) == 0:
            raise ParameterError("template must be non-empty")
        self.template = template
        self.scale = scale or GradingScale()
        self.sign_align = sign_align
        self._palette = class_colors(self.scale)
        self._cursor = 0
        self._steps = 0
        self._t_sum = np.zeros(NUM_JOINTS)
        self._closed = False
        self._last_step_seconds = 0.0

    @property
    def steps(self) -> int:
        return self._steps

    def step(self, live_frame: SkeletonFrame) -> FeedbackFrame:
        """Grade one live frame against the template frame at the cursor."""
        if self._closed:
            raise StateError("session is closed")
        started = time.perf_counter()
        template_frame = self.template.frames[self._cursor]
        t_values = joint_dissimilarity(live_frame, template_frame,
                                       sign_align=self.sign_align)
        classes = grade(t_values, self.scale)
        frame = FeedbackFrame(
            frame_index=self._steps,
            t_values=t_values,
            classes=classes,
            colors=self._palette[classes],
            overall=float(t_values.mean()),
        )
        self._cursor = (self._cursor + 1) % len(self.template.frames)
        self._steps += 1
        self._t_sum += t_values
        self._last_step_seconds = time.perf_counter() - started
        return frame

    def mean_t_per_joint(self) -> np.ndarray:
        """Per-joint mean dissimilarity over all steps so far (zeros before any step)."""
        if self._steps == 0:
            return np.zeros(NUM_JOINTS)
        return self._t_sum / self._steps

    def close(self) -> None:
        self._closed = True
