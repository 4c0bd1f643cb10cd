"""Recording IO, matrix views, and length equalization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rehabkit.errors import (
    DataError,
    EmptyInputError,
    RecordingParseError,
    SchemaError,
)
from rehabkit.skeleton_io import (
    BONES,
    FRAME_WIDTH,
    JOINT_NAMES,
    NUM_JOINTS,
    Dataset,
    Recording,
    SkeletonFrame,
    equalize_lengths,
    frames_from_matrix,
    load_dataset,
    load_recording,
    mean_frame_count,
    resample_channels,
    save_dataset,
    save_recording,
    to_matrix,
)

from conftest import make_frame, make_recording


def test_skeleton_constants():
    assert len(JOINT_NAMES) == NUM_JOINTS == 25
    assert len(BONES) == 24
    assert all(0 <= a < 25 and 0 <= b < 25 for a, b in BONES)


def test_frame_rejects_wrong_joint_count():
    with pytest.raises(SchemaError):
        SkeletonFrame(positions=np.zeros((24, 3)), orientations=np.zeros((25, 4)))


def test_frame_rejects_nonunit_quaternion():
    quats = np.zeros((25, 4))
    quats[:, 0] = 1.0
    quats[3, 0] = 0.98
    with pytest.raises(DataError):
        SkeletonFrame(positions=np.zeros((25, 3)), orientations=quats)


def test_frame_rejects_nonfinite():
    quats = np.zeros((25, 4))
    quats[:, 0] = 1.0
    positions = np.zeros((25, 3))
    positions[0, 0] = np.nan
    with pytest.raises(DataError):
        SkeletonFrame(positions=positions, orientations=quats)


def test_recording_validates_score_range(rng):
    with pytest.raises(DataError):
        make_recording(rng, score=51.0)


def test_recording_requires_increasing_frame_index(rng):
    frames = [make_frame(rng, 0), make_frame(rng, 0)]
    with pytest.raises(SchemaError):
        Recording("s", "E1", "healthy", frames)


# -- .rec files -------------------------------------------------------------

def test_rec_round_trip_is_exact(rng, tmp_path):
    recording = make_recording(rng, n_frames=100)
    path = tmp_path / "take.rec"
    save_recording(path, recording)
    loaded = load_recording(path)
    assert len(loaded) == 100
    assert loaded.subject_id == recording.subject_id
    assert loaded.clinical_score == recording.clinical_score
    np.testing.assert_array_equal(to_matrix(loaded, "positions"),
                                  to_matrix(recording, "positions"))
    # orientations were unit already; renormalization must not move them
    np.testing.assert_allclose(to_matrix(loaded, "orientations"),
                               to_matrix(recording, "orientations"),
                               rtol=0, atol=1e-15)


def test_rec_renormalizes_quaternions(rng, tmp_path):
    recording = make_recording(rng, n_frames=3)
    path = tmp_path / "take.rec"
    save_recording(path, recording)
    lines = path.read_text().splitlines()
    row = np.array([float(v) for v in lines[1].split(",")])
    row[75:79] = [0.98, 0.0, 0.0, 0.0]  # first joint quaternion, norm 0.98
    lines[1] = ",".join(repr(float(v)) for v in row)
    path.write_text("\n".join(lines) + "\n")
    loaded = load_recording(path)
    np.testing.assert_allclose(loaded.frames[0].orientations[0], [1, 0, 0, 0],
                               atol=1e-12)


def test_rec_rejects_wrong_joint_count(tmp_path):
    path = tmp_path / "bad.rec"
    path.write_text('{"subject": "s", "exercise": "E1", "cohort": "healthy"}\n'
                    + ",".join(["0.0"] * 171) + "\n")
    with pytest.raises(SchemaError, match="171"):
        load_recording(path)


def test_rec_parse_error_names_line(tmp_path):
    path = tmp_path / "bad.rec"
    row = ["0.0"] * FRAME_WIDTH
    for j in range(25):
        row[75 + 4 * j] = "1.0"  # unit quaternions
    good = ",".join(row)
    path.write_text('{"subject": "s", "exercise": "E1", "cohort": "healthy"}\n'
                    + good + "\n" + good.replace("1.0", "oops", 1) + "\n")
    with pytest.raises(RecordingParseError, match="line 3"):
        load_recording(path)


def test_rec_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.rec"
    path.write_text("not json\n")
    with pytest.raises(RecordingParseError, match="line 1"):
        load_recording(path)


def test_dataset_round_trip(tmp_path, tiny_dataset):
    path = tmp_path / "dataset.json"
    save_dataset(path, tiny_dataset)
    loaded = load_dataset(path)
    assert loaded.manifest == tiny_dataset.manifest
    for a, b in zip(loaded.recordings, tiny_dataset.recordings):
        np.testing.assert_allclose(to_matrix(a), to_matrix(b), rtol=0, atol=1e-15)


# -- matrix views -----------------------------------------------------------

def test_to_matrix_shapes(rng):
    recording = make_recording(rng, n_frames=2)
    assert to_matrix(recording, "positions").shape == (2, 75)
    assert to_matrix(recording, "orientations").shape == (2, 100)
    assert to_matrix(recording, "both").shape == (2, 175)


def test_matrix_frame_round_trip_exact(rng):
    recording = make_recording(rng, n_frames=7)
    matrix = to_matrix(recording, "both")
    rebuilt = frames_from_matrix(matrix)
    np.testing.assert_array_equal(
        matrix, np.stack([f.flat() for f in rebuilt]))


# -- equalization -----------------------------------------------------------

def test_mean_frame_count_rounds_half_up():
    assert mean_frame_count([80, 100, 120]) == 100
    assert mean_frame_count([3, 4]) == 4  # 3.5 rounds up
    assert mean_frame_count([3, 3, 4]) == 3  # 3.33 rounds down


def test_resample_closed_form_line():
    # independent oracle: linear interpolation of [0, 1] onto 5 points
    out = resample_channels(np.array([[0.0], [1.0]]), 5)
    np.testing.assert_array_equal(out[:, 0], [0.0, 0.25, 0.5, 0.75, 1.0])


def test_equalize_to_mean_length(rng):
    recordings = [make_recording(rng, n) for n in (80, 100, 120)]
    out = equalize_lengths(Dataset(recordings=recordings), "E1")
    assert all(len(r) == 100 for r in out.recordings)


def test_equalize_identity_when_already_at_mean(rng):
    recording = make_recording(rng, 50)
    out = equalize_lengths(Dataset(recordings=[recording]), "E1")
    np.testing.assert_allclose(to_matrix(out.recordings[0]), to_matrix(recording),
                               rtol=0, atol=1e-12)


def test_equalize_preserves_endpoints(rng):
    recordings = [make_recording(rng, n) for n in (10, 20)]
    out = equalize_lengths(Dataset(recordings=recordings), "E1")
    for before, after in zip(recordings, out.recordings):
        np.testing.assert_allclose(after.frames[0].positions,
                                   before.frames[0].positions, atol=1e-12)
        np.testing.assert_allclose(after.frames[-1].positions,
                                   before.frames[-1].positions, atol=1e-12)


def test_equalize_empty_exercise_errors(rng):
    with pytest.raises(EmptyInputError):
        equalize_lengths(Dataset(recordings=[make_recording(rng, 5)]), "E2")


def test_equalize_renormalizes_quaternions(rng):
    recordings = [make_recording(rng, n) for n in (9, 17)]
    out = equalize_lengths(Dataset(recordings=recordings), "E1")
    for rec in out.recordings:
        for frame in rec.frames:
            np.testing.assert_allclose(np.linalg.norm(frame.orientations, axis=1),
                                       1.0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(lengths=st.lists(st.integers(min_value=2, max_value=40), min_size=1, max_size=5),
       seed=st.integers(0, 2**16))
def test_equalize_idempotent(lengths, seed):
    rng = np.random.default_rng(seed)
    dataset = Dataset(recordings=[make_recording(rng, n) for n in lengths])
    once = equalize_lengths(dataset, "E1")
    twice = equalize_lengths(once, "E1")
    for a, b in zip(once.recordings, twice.recordings):
        np.testing.assert_allclose(to_matrix(a), to_matrix(b), rtol=0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(m=st.integers(2, 30), target=st.integers(2, 50), seed=st.integers(0, 2**16))
def test_resample_stays_within_channel_bounds(m, target, seed):
    rng = np.random.default_rng(seed)
    matrix = rng.normal(size=(m, 4))
    out = resample_channels(matrix, target)
    eps = 1e-12
    assert np.all(out.min(axis=0) >= matrix.min(axis=0) - eps)
    assert np.all(out.max(axis=0) <= matrix.max(axis=0) + eps)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False),
                min_size=3, max_size=10))
def test_rec_values_round_trip_bit_faithful(tmp_path_factory, values):
    # arbitrary finite floats written into position channels survive exactly
    rng = np.random.default_rng(0)
    recording = make_recording(rng, n_frames=len(values))
    for i, v in enumerate(values):
        recording.frames[i].positions[0, 0] = v
    path = tmp_path_factory.mktemp("rt") / "take.rec"
    save_recording(path, recording)
    loaded = load_recording(path)
    got = [f.positions[0, 0] for f in loaded.frames]
    assert got == values
