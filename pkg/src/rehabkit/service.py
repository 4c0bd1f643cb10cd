"""Network service for live feedback sessions.

Clients hold one WebSocket to ``/session`` and exchange JSON messages
(WebSocket frames supply the length-prefixed stream framing).  Per
connection, ``start_session`` binds a feedback session to an exercise
template; every accepted ``live_frame`` yields exactly one ``feedback``
message; ``end_session`` yields a ``session_summary`` carrying per-joint mean
dissimilarity and the predicted clinical score (0-50) over the accumulated
performance.  Template metadata and frames are served over plain GET
endpoints for the dashboard.

Incoming messages pass through a bounded per-connection queue; a client that
sends faster than frames are processed receives an explicit drop notice per
overflowing frame instead of silent loss.
"""

from __future__ import annotations

import asyncio
import json
import os
import uuid
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from .errors import RehabKitError
from .features import (
    FeatureDef,
    FeatureScaler,
    FeatureSpec,
    context_window,
    extract_features,
)
from .feedback import FeedbackSession, GradingScale
from .models import AutoencoderModel, MultiScaleScorer, encode, predict_score
from .skeleton_io import (
    EXERCISE_NAMES,
    NUM_JOINTS,
    Recording,
    SkeletonFrame,
    load_recording,
    normalize_quaternions,
)

PROTOCOL_VERSION = 1
DEFAULT_QUEUE_LIMIT = 256
PARTIAL_THRESHOLD = 0.5  # sessions shorter than this fraction of the template are partial


# ---------------------------------------------------------------------------
# scoring pipeline bundle (feature spec + scaler + encoder + scorer)
# ---------------------------------------------------------------------------

@dataclass
class ScoringPipeline:
    """Everything needed to turn raw live frames into a clinical-scale score."""

    exercise_id: str
    spec: FeatureSpec
    scaler: FeatureScaler
    autoencoder: AutoencoderModel
    scorer: MultiScaleScorer
    window: int

    def predict_clinical(self, frames: list[SkeletonFrame]) -> float:
        recording = Recording(
            subject_id="live", exercise_id=self.exercise_id, cohort="impaired",
            frames=[
                SkeletonFrame(positions=f.positions, orientations=f.orientations,
                              frame_index=i, timestamp_ms=i * 1000.0 / 30.0)
                for i, f in enumerate(frames)
            ])
        feats = extract_features(recording, self.spec)
        latent = encode(self.autoencoder, self.scaler.transform(feats.values))
        return 50.0 * predict_score(self.scorer, context_window(latent, self.window))

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.autoencoder.save(directory / "autoencoder.json")
        self.scorer.save(directory / "scorer.json")
        manifest = {
            "exercise": self.exercise_id,
            "window": self.window,
            "scaler": self.scaler.to_dict(),
            "features": [
                {"kind": fd.kind, "joints": list(fd.joints),
                 "axis": fd.axis, "component": fd.component}
                for fd in self.spec.features
            ],
        }
        with open(directory / "pipeline.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh)

    @classmethod
    def load(cls, directory: str | Path) -> "ScoringPipeline":
        directory = Path(directory)
        with open(directory / "pipeline.json", "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        autoencoder, _ = AutoencoderModel.load(directory / "autoencoder.json")
        scorer, _ = MultiScaleScorer.load(directory / "scorer.json")
        spec = FeatureSpec(
            exercise_id=manifest["exercise"],
            features=[FeatureDef(kind=item["kind"], joints=tuple(item["joints"]),
                                 axis=item["axis"], component=item["component"])
                      for item in manifest["features"]],
        )
        return cls(exercise_id=manifest["exercise"], spec=spec,
                   scaler=FeatureScaler.from_dict(manifest["scaler"]),
                   autoencoder=autoencoder, scorer=scorer,
                   window=manifest["window"])


def load_pipelines(checkpoints_dir: str | Path) -> dict[str, ScoringPipeline]:
    """One pipeline per exercise subdirectory containing a pipeline.json."""
    checkpoints_dir = Path(checkpoints_dir)
    pipelines = {}
    for sub in sorted(checkpoints_dir.iterdir()):
        if (sub / "pipeline.json").exists():
            pipeline = ScoringPipeline.load(sub)
            pipelines[pipeline.exercise_id] = pipeline
    return pipelines


def load_templates(templates_dir: str | Path) -> dict[str, Recording]:
    templates = {}
    for path in sorted(Path(templates_dir).glob("*.rec")):
        recording = load_recording(path)
        templates[recording.exercise_id] = recording
    return templates


def list_templates(templates: dict[str, Recording]) -> list[dict]:
    return [
        {"exercise_id": ex, "name": EXERCISE_NAMES.get(ex, ex),
         "frame_count": len(rec.frames)}
        for ex, rec in sorted(templates.items())
    ]


# ---------------------------------------------------------------------------
# wire helpers
# ---------------------------------------------------------------------------

def _parse_live_frame(payload: dict) -> SkeletonFrame:
    frame = payload.get("frame")
    if not isinstance(frame, dict):
        raise RehabKitError("live_frame message carries no frame object")
    positions = np.asarray(frame.get("positions", []), dtype=np.float64)
    orientations = np.asarray(frame.get("orientations", []), dtype=np.float64)
    if positions.shape != (NUM_JOINTS, 3):
        raise RehabKitError(f"positions must be {NUM_JOINTS}x3, got {positions.shape}")
    if orientations.shape != (NUM_JOINTS, 4):
        raise RehabKitError(f"orientations must be {NUM_JOINTS}x4, got {orientations.shape}")
    return SkeletonFrame(
        positions=positions,
        orientations=normalize_quaternions(orientations),
        frame_index=int(frame.get("frame_index", 0)),
        timestamp_ms=float(frame.get("timestamp_ms", 0.0)),
    )


def _feedback_message(session_id: str, seq: int, frame) -> dict:
    return {
        "v": PROTOCOL_VERSION, "kind": "feedback", "session_id": session_id,
        "seq": seq, "frame_index": frame.frame_index,
        "t_values": [float(v) for v in frame.t_values],
        "classes": [int(c) for c in frame.classes],
        "colors": [[int(v) for v in rgb] for rgb in frame.colors],
        "overall": frame.overall,
    }


def _error_message(session_id: str | None, seq: int, code: str, text: str) -> dict:
    return {"v": PROTOCOL_VERSION, "kind": "error", "session_id": session_id,
            "seq": seq, "code": code, "text": text}


class _Connection:
    """Per-connection session state; owned by one worker task."""

    def __init__(self, templates, pipelines, scale, queue_limit):
        self.templates = templates
        self.pipelines = pipelines
        self.scale = scale
        self.queue: asyncio.Queue = asyncio.Queue(maxsize=queue_limit)
        self.session: FeedbackSession | None = None
        self.session_id: str | None = None
        self.exercise_id: str | None = None
        self.live_frames: list[SkeletonFrame] = []
        self.last_seq = -1
        self.counter = 0

    def start(self, exercise_id: str, requested_id: str | None) -> str:
        template = self.templates[exercise_id]
        self.counter += 1
        self.session = FeedbackSession(template, self.scale)
        self.session_id = requested_id or uuid.uuid4().hex[:12]
        self.exercise_id = exercise_id
        self.live_frames = []
        return self.session_id

    def finish(self) -> dict:
        template = self.templates[self.exercise_id]
        mean_t = self.session.mean_t_per_joint()
        predicted = None
        pipeline = self.pipelines.get(self.exercise_id)
        if pipeline is not None and len(self.live_frames) >= 2:
            predicted = pipeline.predict_clinical(self.live_frames)
        partial = len(self.live_frames) < PARTIAL_THRESHOLD * len(template.frames)
        summary = {
            "v": PROTOCOL_VERSION, "kind": "session_summary",
            "session_id": self.session_id, "seq": self.last_seq + 1,
            "mean_t": [float(v) for v in mean_t],
            "predicted_score": predicted,
            "partial": bool(partial),
            "frames": len(self.live_frames),
        }
        self.session.close()
        self.session = None
        self.session_id = None
        self.exercise_id = None
        return summary


def build_app(templates: dict[str, Recording],
              pipelines: dict[str, ScoringPipeline] | None = None,
              scale: GradingScale | None = None,
              queue_limit: int = DEFAULT_QUEUE_LIMIT,
              frame_delay: float = 0.0) -> FastAPI:
    """Assemble the service around immutable template/model state.

    ``frame_delay`` throttles per-frame processing (seconds); at 0 frames are
    handled as fast as they arrive.  Slowing processing makes the bounded
    queue overflow observable to clients as explicit drop notices.
    """
    pipelines = pipelines or {}
    scale = scale or GradingScale()
    app = FastAPI(title="rehabkit feedback service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.get("/health")
    def health():
        return {"status": "ok", "templates": sorted(templates),
                "scored_exercises": sorted(pipelines)}

    @app.get("/templates")
    def templates_index():
        return list_templates(templates)

    @app.get("/templates/{exercise_id}")
    def template_detail(exercise_id: str):
        if exercise_id not in templates:
            return {"error": f"unknown exercise {exercise_id!r}"}
        recording = templates[exercise_id]
        return {
            "exercise_id": exercise_id,
            "name": EXERCISE_NAMES.get(exercise_id, exercise_id),
            "frame_count": len(recording.frames),
            "frames": [
                {"positions": f.positions.tolist(),
                 "orientations": f.orientations.tolist()}
                for f in recording.frames
            ],
        }

    @app.websocket("/session")
    async def session_socket(ws: WebSocket):
        await ws.accept()
        conn = _Connection(templates, pipelines, scale, queue_limit)
        worker = asyncio.create_task(_worker(ws, conn))
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    message = json.loads(raw)
                except json.JSONDecodeError:
                    message = {"kind": "__unparseable__"}
                if message.get("kind") == "live_frame":
                    try:
                        conn.queue.put_nowait(message)
                    except asyncio.QueueFull:
                        await ws.send_json(_error_message(
                            conn.session_id, int(message.get("seq", -1)),
                            "FRAME_DROPPED", "processing queue full; frame dropped"))
                else:
                    await conn.queue.put(message)
        except WebSocketDisconnect:
            pass
        finally:
            worker.cancel()

    async def _worker(ws: WebSocket, conn: _Connection):
        while True:
            message = await conn.queue.get()
            if frame_delay and message.get("kind") == "live_frame":
                await asyncio.sleep(frame_delay)
            try:
                reply = _handle(conn, message)
            except Exception as exc:  # malformed input must not kill the stream
                reply = [_error_message(conn.session_id, int(message.get("seq", -1)),
                                        "INTERNAL", str(exc))]
            for item in reply:
                await ws.send_json(item)

    return app


def _handle(conn: _Connection, message: dict) -> list[dict]:
    kind = message.get("kind")
    seq = message.get("seq", -1)
    if not isinstance(seq, int):
        return [_error_message(conn.session_id, -1, "BAD_MESSAGE",
                               "seq must be an integer")]
    if kind == "__unparseable__":
        return [_error_message(conn.session_id, -1, "BAD_MESSAGE", "invalid JSON")]

    if kind == "start_session":
        exercise_id = message.get("exercise_id")
        if exercise_id not in conn.templates:
            return [_error_message(None, seq, "UNKNOWN_EXERCISE",
                                   f"no template for exercise {exercise_id!r}")]
        if conn.session is not None:
            return [_error_message(conn.session_id, seq, "SESSION_ACTIVE",
                                   "end the current session first")]
        session_id = conn.start(exercise_id, message.get("session_id"))
        conn.last_seq = seq
        return [{"v": PROTOCOL_VERSION, "kind": "session_started",
                 "session_id": session_id, "seq": seq,
                 "exercise_id": exercise_id,
                 "template_frames": len(conn.templates[exercise_id].frames)}]

    if kind == "live_frame":
        if conn.session is None:
            return [_error_message(None, seq, "NO_SESSION",
                                   "start_session must precede live frames")]
        if seq <= conn.last_seq:
            return [_error_message(conn.session_id, seq, "BAD_SEQUENCE",
                                   f"seq {seq} is not greater than {conn.last_seq}")]
        try:
            frame = _parse_live_frame(message)
        except RehabKitError as exc:
            return [_error_message(conn.session_id, seq, "BAD_FRAME", str(exc))]
        conn.last_seq = seq
        conn.live_frames.append(frame)
        feedback = conn.session.step(frame)
        return [_feedback_message(conn.session_id, seq, feedback)]

    if kind == "end_session":
        if conn.session is None:
            return [_error_message(None, seq, "NO_SESSION", "no active session")]
        conn.last_seq = max(conn.last_seq, seq)
        return [conn.finish()]

    return [_error_message(conn.session_id, seq if isinstance(seq, int) else -1,
                           "BAD_MESSAGE", f"unknown message kind {kind!r}")]


def serve(bind: str | None = None, templates_dir: str | Path = "templates",
          checkpoints_dir: str | Path | None = None,
          scale: GradingScale | None = None) -> None:
    """Load state and run the service (blocking)."""
    import uvicorn

    bind = bind or os.environ.get("REHABKIT_BIND", "127.0.0.1:8777")
    host, _, port = bind.rpartition(":")
    templates = load_templates(templates_dir)
    if not templates:
        raise RehabKitError(f"no templates found under {templates_dir}")
    pipelines = load_pipelines(checkpoints_dir) if checkpoints_dir else {}
    app = build_app(templates, pipelines, scale)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
