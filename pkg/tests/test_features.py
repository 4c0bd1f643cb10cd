"""Feature extraction, score scaling, and context windows."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rehabkit.errors import DataError, ParameterError, SchemaError
from rehabkit.features import (
    FeatureDef,
    FeatureScaler,
    FeatureSpec,
    context_window,
    default_feature_specs,
    extract_features,
    load_feature_specs,
    save_feature_specs,
    scale_score,
)
from rehabkit.skeleton_io import EXERCISE_IDS

from conftest import make_recording


def _recording_with_positions(rng, positions_by_joint: dict[int, np.ndarray], n=4):
    rec = make_recording(rng, n_frames=n)
    for frame in rec.frames:
        for joint, pos in positions_by_joint.items():
            frame.positions[joint] = pos
    return rec


def test_collinear_joints_give_straight_angle(rng):
    rec = _recording_with_positions(rng, {4: np.array([0.0, 0, 0]),
                                          5: np.array([1.0, 0, 0]),
                                          6: np.array([2.0, 0, 0])})
    spec = FeatureSpec("E1", [FeatureDef("joint_angle", (4, 5, 6))])
    out = extract_features(rec, spec)
    np.testing.assert_allclose(out.values[:, 0], np.pi, atol=1e-12)


def test_distance_to_self_is_zero(rng):
    rec = make_recording(rng, n_frames=3)
    spec = FeatureSpec("E1", [FeatureDef("pairwise_distance", (7, 7))])
    out = extract_features(rec, spec)
    np.testing.assert_array_equal(out.values[:, 0], 0.0)


def test_right_angle_elbow(rng):
    # oracle: angle between normalized (shoulder-elbow) and (wrist-elbow) dot product
    shoulder, elbow, wrist = np.array([0.0, 1, 0]), np.zeros(3), np.array([1.0, 0, 0])
    u = shoulder - elbow
    v = wrist - elbow
    expected = np.arccos(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))
    assert expected == pytest.approx(np.pi / 2)

    rec = _recording_with_positions(rng, {8: shoulder, 9: elbow, 10: wrist})
    spec = FeatureSpec("E1", [FeatureDef("joint_angle", (8, 9, 10))])
    out = extract_features(rec, spec)
    np.testing.assert_allclose(out.values[:, 0], expected, atol=1e-12)


def test_degenerate_angle_flags_frame(rng):
    rec = _recording_with_positions(rng, {4: np.zeros(3), 5: np.zeros(3),
                                          6: np.array([1.0, 0, 0])})
    spec = FeatureSpec("E1", [FeatureDef("joint_angle", (4, 5, 6))])
    out = extract_features(rec, spec)
    np.testing.assert_array_equal(out.values[:, 0], 0.0)
    assert out.degenerate.all()


def test_orientation_component_feature(rng):
    rec = make_recording(rng, n_frames=3)
    spec = FeatureSpec("E1", [FeatureDef("orientation_component", (2,), component="x")])
    out = extract_features(rec, spec)
    expected = [f.orientations[2, 1] for f in rec.frames]
    np.testing.assert_array_equal(out.values[:, 0], expected)


def test_extract_carries_scaled_score(rng):
    rec = make_recording(rng, score=25.0)
    out = extract_features(rec, default_feature_specs()["E1"])
    assert out.score == 0.5


def test_angles_bounded(rng):
    rec = make_recording(rng, n_frames=30)
    spec = default_feature_specs()["E1"]
    out = extract_features(rec, spec)
    angles = out.values[:, :4]  # first four are joint angles
    assert np.all(angles >= 0.0) and np.all(angles <= np.pi)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**16),
       offset=st.tuples(*[st.floats(-10, 10) for _ in range(3)]))
def test_translation_invariance(seed, offset):
    rng = np.random.default_rng(seed)
    rec = make_recording(rng, n_frames=5)
    spec = default_feature_specs()["E1"]
    base = extract_features(rec, spec).values
    for frame in rec.frames:
        frame.positions += np.asarray(offset)
    shifted = extract_features(rec, spec).values
    assert np.max(np.abs(base - shifted)) < 1e-9


# -- scale_score --------------------------------------------------------------

def test_scale_score_endpoints_and_midpoint():
    assert scale_score(50.0) == 1.0
    assert scale_score(0.0) == 0.0
    assert scale_score(25.0) == 0.5


def test_scale_score_domain_error():
    with pytest.raises(DataError):
        scale_score(50.5)
    with pytest.raises(DataError):
        scale_score(-0.1)


@given(st.floats(0.0, 1.0))
def test_scale_score_inverts_fifty_times(x):
    assert scale_score(50.0 * x) == pytest.approx(x, abs=1e-15)


def test_scale_score_affine_on_grid():
    xs = np.linspace(0, 50, 100)
    ys = np.array([scale_score(x) for x in xs])
    np.testing.assert_allclose(np.diff(ys), np.diff(ys)[0], atol=1e-12)


# -- context windows ----------------------------------------------------------

def test_context_window_one_is_identity(rng):
    seq = rng.normal(size=(6, 3))
    np.testing.assert_array_equal(context_window(seq, 1), seq)


def test_context_window_hand_enumerated():
    # replicate padding, hand-worked: rows [a,a,b], [a,b,c], [b,c,c]
    a, b, c = 1.0, 2.0, 3.0
    out = context_window(np.array([[a], [b], [c]]), 3)
    np.testing.assert_array_equal(out, [[a, a, b], [a, b, c], [b, c, c]])


def test_context_window_width(rng):
    for d in (1, 4, 9):
        seq = rng.normal(size=(5, d))
        assert context_window(seq, 3).shape == (5, 3 * d)


def test_context_window_rejects_even():
    with pytest.raises(ParameterError):
        context_window(np.zeros((3, 2)), 2)
    with pytest.raises(ParameterError):
        context_window(np.zeros((3, 2)), 0)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 12), d=st.integers(1, 4),
       w=st.sampled_from([1, 3, 5, 7]), seed=st.integers(0, 2**16))
def test_context_window_center_block(m, d, w, seed):
    rng = np.random.default_rng(seed)
    seq = rng.normal(size=(m, d))
    out = context_window(seq, w)
    half = (w - 1) // 2
    center = out[:, half * d:(half + 1) * d]
    np.testing.assert_array_equal(center, seq)


# -- specs and scaler ---------------------------------------------------------

def test_default_specs_cover_all_exercises():
    specs = default_feature_specs()
    assert set(specs) == set(EXERCISE_IDS)
    assert all(spec.width >= 1 for spec in specs.values())


def test_spec_yaml_round_trip(tmp_path):
    path = tmp_path / "features.yaml"
    save_feature_specs(path, default_feature_specs())
    loaded = load_feature_specs(path)
    for ex, spec in default_feature_specs().items():
        assert loaded[ex].features == spec.features


def test_feature_def_validation():
    with pytest.raises(ParameterError):
        FeatureDef("joint_angle", (1, 2))  # needs 3 joints
    with pytest.raises(ParameterError):
        FeatureDef("pairwise_distance", (1, 99))
    with pytest.raises(ParameterError):
        FeatureDef("nonsense", ())


def test_scaler_round_trip(rng):
    data = [rng.normal(loc=3.0, scale=2.0, size=(20, 4)) for _ in range(3)]
    scaler = FeatureScaler.fit(data)
    normalized = scaler.transform(np.concatenate(data))
    assert abs(normalized.mean()) < 1e-9
    restored = FeatureScaler.from_dict(scaler.to_dict())
    np.testing.assert_array_equal(restored.mean, scaler.mean)
    np.testing.assert_array_equal(restored.std, scaler.std)


def test_scaler_handles_constant_channels():
    data = [np.zeros((10, 2))]
    scaler = FeatureScaler.fit(data)
    out = scaler.transform(data[0])
    assert np.all(np.isfinite(out))
