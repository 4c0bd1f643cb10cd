"""Feedback service: wire protocol, HTTP endpoints, scoring pipeline."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from rehabkit.features import FeatureScaler, context_window, default_feature_specs, extract_features
from rehabkit.models import AutoencoderConfig, ScorerConfig, TrainConfig, encode, train_autoencoder, train_scorer
from rehabkit.service import (
    ScoringPipeline,
    build_app,
    list_templates,
    load_pipelines,
    load_templates,
)
from rehabkit.skeleton_io import (
    EXERCISE_IDS,
    EXERCISE_NAMES,
    save_recording,
)
from rehabkit.synth import SynthConfig, generate_synthetic, generate_template
from rehabkit.skeleton_io import equalize_lengths

from conftest import make_frame


def frame_payload(frame, seq):
    return {
        "v": 1, "kind": "live_frame", "seq": seq,
        "frame": {
            "positions": frame.positions.tolist(),
            "orientations": frame.orientations.tolist(),
            "frame_index": frame.frame_index,
            "timestamp_ms": frame.timestamp_ms,
        },
    }


@pytest.fixture(scope="module")
def templates():
    return {ex: generate_template(SynthConfig(exercise=ex, frames=30, seed=7))
            for ex in EXERCISE_IDS}


@pytest.fixture(scope="module")
def trained_pipeline():
    """A small but genuinely trained scoring pipeline for E1."""
    synth = SynthConfig(exercise="E1", n_healthy=12, n_impaired=10, frames=36,
                        noise_std=0.01, attenuation_range=(0.85, 1.0),
                        weakness_burst_max=0.8, length_jitter=3, seed=13)
    dataset = equalize_lengths(generate_synthetic(synth), "E1")
    spec = default_feature_specs()["E1"]
    feats = [extract_features(r, spec) for r in dataset.recordings]
    healthy = [f for f in feats if f.subject_id.startswith("H")]
    scaler = FeatureScaler.fit([f.values for f in healthy])

    ae_cfg = TrainConfig(seed=0, patience=40, max_epochs=250, learning_rate=3e-3)
    autoencoder, _ = train_autoencoder([scaler.transform(f.values) for f in healthy],
                                       ae_cfg, AutoencoderConfig(hidden1=10, hidden2=6, latent=3))
    window = 3
    samples = [(context_window(encode(autoencoder, scaler.transform(f.values)), window),
                f.score) for f in feats]
    scorer, _ = train_scorer(samples,
                             TrainConfig(seed=0, patience=120, max_epochs=600,
                                         learning_rate=1.5e-3),
                             ScorerConfig(branch_channels=(6, 10), lstm_hidden=10,
                                          fc_hidden=6))
    return ScoringPipeline(exercise_id="E1", spec=spec, scaler=scaler,
                           autoencoder=autoencoder, scorer=scorer, window=window)


@pytest.fixture(scope="module")
def client(templates, trained_pipeline):
    app = build_app(templates, {"E1": trained_pipeline})
    with TestClient(app) as c:
        yield c


# -- HTTP ---------------------------------------------------------------------

def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["templates"] == sorted(EXERCISE_IDS)


def test_templates_index_lists_five_with_names(client, templates):
    body = client.get("/templates").json()
    assert [t["exercise_id"] for t in body] == list(EXERCISE_IDS)
    names = {t["exercise_id"]: t["name"] for t in body}
    assert names == dict(EXERCISE_NAMES)
    counts = {t["exercise_id"]: t["frame_count"] for t in body}
    assert counts == {ex: len(rec.frames) for ex, rec in templates.items()}


def test_template_detail_serves_frames(client, templates):
    body = client.get("/templates/E2").json()
    assert body["frame_count"] == len(templates["E2"].frames)
    assert len(body["frames"]) == body["frame_count"]
    assert len(body["frames"][0]["positions"]) == 25
    assert client.get("/templates/E9").json().get("error")


def test_list_templates_helper(templates):
    meta = list_templates(templates)
    assert len(meta) == 5
    assert meta[0]["name"] == "Lifting of Arms"


# -- session protocol -----------------------------------------------------------

def test_start_then_frames_yield_matching_feedback(client, templates):
    template = templates["E1"]
    with client.websocket_connect("/session") as ws:
        ws.send_json({"v": 1, "kind": "start_session", "seq": 0, "exercise_id": "E1"})
        started = ws.receive_json()
        assert started["kind"] == "session_started"
        assert started["template_frames"] == len(template.frames)
        for i in range(10):
            ws.send_json(frame_payload(template.frames[i], seq=i + 1))
        for i in range(10):
            feedback = ws.receive_json()
            assert feedback["kind"] == "feedback"
            assert feedback["seq"] == i + 1
            assert feedback["session_id"] == started["session_id"]
            assert len(feedback["t_values"]) == 25
            assert len(feedback["colors"]) == 25


def test_unknown_exercise_creates_no_session(client, templates):
    with client.websocket_connect("/session") as ws:
        ws.send_json({"v": 1, "kind": "start_session", "seq": 0, "exercise_id": "E9"})
        err = ws.receive_json()
        assert err["kind"] == "error" and err["code"] == "UNKNOWN_EXERCISE"
        ws.send_json(frame_payload(templates["E1"].frames[0], seq=1))
        assert ws.receive_json()["code"] == "NO_SESSION"


def test_bad_frame_keeps_session_alive(client, templates):
    template = templates["E1"]
    with client.websocket_connect("/session") as ws:
        ws.send_json({"v": 1, "kind": "start_session", "seq": 0, "exercise_id": "E1"})
        ws.receive_json()
        bad = frame_payload(template.frames[0], seq=1)
        bad["frame"]["positions"] = bad["frame"]["positions"][:24]  # 24 joints
        ws.send_json(bad)
        err = ws.receive_json()
        assert err["kind"] == "error" and err["code"] == "BAD_FRAME"
        ws.send_json(frame_payload(template.frames[0], seq=2))
        assert ws.receive_json()["kind"] == "feedback"


def test_sequence_numbers_must_increase(client, templates):
    template = templates["E1"]
    with client.websocket_connect("/session") as ws:
        ws.send_json({"v": 1, "kind": "start_session", "seq": 0, "exercise_id": "E1"})
        ws.receive_json()
        ws.send_json(frame_payload(template.frames[0], seq=5))
        assert ws.receive_json()["kind"] == "feedback"
        ws.send_json(frame_payload(template.frames[1], seq=5))
        assert ws.receive_json()["code"] == "BAD_SEQUENCE"


def test_second_start_requires_end(client, templates):
    with client.websocket_connect("/session") as ws:
        ws.send_json({"v": 1, "kind": "start_session", "seq": 0, "exercise_id": "E1"})
        ws.receive_json()
        ws.send_json({"v": 1, "kind": "start_session", "seq": 1, "exercise_id": "E2"})
        assert ws.receive_json()["code"] == "SESSION_ACTIVE"


def test_template_self_replay_all_green_full_summary(client, templates):
    """End-to-end oracle: replaying the template itself must grade green
    everywhere and score near the healthy template."""
    template = templates["E1"]
    with client.websocket_connect("/session") as ws:
        ws.send_json({"v": 1, "kind": "start_session", "seq": 0, "exercise_id": "E1"})
        ws.receive_json()
        for i, frame in enumerate(template.frames):
            ws.send_json(frame_payload(frame, seq=i + 1))
        greens = 0
        for _ in template.frames:
            feedback = ws.receive_json()
            assert feedback["kind"] == "feedback"
            assert feedback["overall"] == 0.0
            assert all(c == 0 for c in feedback["classes"])
            assert all(rgb == [0, 255, 0] for rgb in feedback["colors"])
            greens += 1
        assert greens == len(template.frames)
        ws.send_json({"v": 1, "kind": "end_session", "seq": len(template.frames) + 1})
        summary = ws.receive_json()
        assert summary["kind"] == "session_summary"
        assert summary["partial"] is False
        assert summary["frames"] == len(template.frames)
        assert max(summary["mean_t"]) == 0.0
        # trained on healthy scores near 1.0: template replay must score high
        assert summary["predicted_score"] is not None
        assert summary["predicted_score"] > 30.0
        assert summary["predicted_score"] <= 50.0


def test_short_session_flagged_partial(client, templates):
    template = templates["E1"]
    with client.websocket_connect("/session") as ws:
        ws.send_json({"v": 1, "kind": "start_session", "seq": 0, "exercise_id": "E1"})
        ws.receive_json()
        for i in range(3):  # well under half the template
            ws.send_json(frame_payload(template.frames[i], seq=i + 1))
            ws.receive_json()
        ws.send_json({"v": 1, "kind": "end_session", "seq": 4})
        summary = ws.receive_json()
        assert summary["partial"] is True
        assert summary["frames"] == 3


def test_concurrent_sessions_are_isolated(client, templates, rng):
    t1, t2 = templates["E1"], templates["E3"]
    with client.websocket_connect("/session") as ws1, \
            client.websocket_connect("/session") as ws2:
        ws1.send_json({"v": 1, "kind": "start_session", "seq": 0, "exercise_id": "E1"})
        ws2.send_json({"v": 1, "kind": "start_session", "seq": 0, "exercise_id": "E3"})
        s1 = ws1.receive_json()
        s2 = ws2.receive_json()
        assert s1["exercise_id"] == "E1" and s2["exercise_id"] == "E3"

        # interleaved delivery: session 1 replays its own template (greens),
        # session 2 feeds a foreign frame stream (non-greens)
        wild = make_frame(rng)
        n = 8
        for i in range(n):
            ws1.send_json(frame_payload(t1.frames[i], seq=i + 1))
            ws2.send_json(frame_payload(wild, seq=i + 1))
        f1 = [ws1.receive_json() for _ in range(n)]
        f2 = [ws2.receive_json() for _ in range(n)]
        assert [f["seq"] for f in f1] == list(range(1, n + 1))
        assert [f["seq"] for f in f2] == list(range(1, n + 1))
        assert all(f["overall"] == 0.0 for f in f1)
        assert all(f["overall"] > 0.0 for f in f2)
        assert len({f["session_id"] for f in f1}) == 1
        assert len({f["session_id"] for f in f2}) == 1
        assert f1[0]["session_id"] != f2[0]["session_id"]


def test_backpressure_drops_are_explicit(templates, trained_pipeline):
    app = build_app(templates, {}, queue_limit=3, frame_delay=0.03)
    template = templates["E1"]
    with TestClient(app) as client:
        with client.websocket_connect("/session") as ws:
            ws.send_json({"v": 1, "kind": "start_session", "seq": 0,
                          "exercise_id": "E1"})
            ws.receive_json()
            n = 12
            for i in range(n):
                ws.send_json(frame_payload(template.frames[i % 30], seq=i + 1))
            replies = [ws.receive_json() for _ in range(n)]
            feedback = [r for r in replies if r["kind"] == "feedback"]
            dropped = [r for r in replies if r.get("code") == "FRAME_DROPPED"]
            assert len(feedback) + len(dropped) == n
            assert len(dropped) >= 1
            seqs = [f["seq"] for f in feedback]
            assert seqs == sorted(seqs)  # in-order processing of accepted frames


def test_malformed_json_is_reported(client):
    with client.websocket_connect("/session") as ws:
        ws.send_text("this is not json")
        assert ws.receive_json()["code"] == "BAD_MESSAGE"


def test_unknown_kind_is_reported(client):
    with client.websocket_connect("/session") as ws:
        ws.send_json({"v": 1, "kind": "telemetry", "seq": 0})
        assert ws.receive_json()["code"] == "BAD_MESSAGE"


# -- pipeline persistence --------------------------------------------------------

def test_pipeline_save_load_round_trip(tmp_path, trained_pipeline, templates):
    outdir = tmp_path / "checkpoints" / "E1"
    trained_pipeline.save(outdir)
    loaded = load_pipelines(tmp_path / "checkpoints")
    assert set(loaded) == {"E1"}
    frames = templates["E1"].frames
    a = trained_pipeline.predict_clinical(frames)
    b = loaded["E1"].predict_clinical(frames)
    assert a == pytest.approx(b, abs=1e-12)


def test_template_dir_round_trip(tmp_path, templates):
    for ex, rec in templates.items():
        save_recording(tmp_path / f"{ex}.rec", rec)
    loaded = load_templates(tmp_path)
    assert set(loaded) == set(EXERCISE_IDS)
    assert len(loaded["E4"].frames) == len(templates["E4"].frames)
