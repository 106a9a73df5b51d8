import json

import numpy as np
import pytest
from conftest import frame_text, person

from signsearch.errors import EmptyFrameError, EmptySequenceError, ParseError
from signsearch.pose_io import (
    FrameKeypoints,
    frame_to_json,
    load_sequence,
    parse_frame,
    write_sequence,
)
from signsearch.synth import synth_raw_sequence


def test_parse_deinterleaves_first_body_joint():
    body = [100.0, 50.0, 0.9] + [0.0] * 72
    frame = parse_frame(frame_text(person(body)), 3)
    assert tuple(frame.body[0]) == (100.0, 50.0, 0.9)
    assert frame.keypoint("body", 0) == (100.0, 50.0, 0.9)
    assert frame.frame_index == 3
    assert frame.body.shape == (25, 3)
    assert frame.left_hand.shape == frame.right_hand.shape == (21, 3)


def test_parse_no_people():
    with pytest.raises(EmptyFrameError):
        parse_frame(frame_text())


def test_parse_takes_first_person(rng):
    a, b = rng.uniform(0, 1, 75), rng.uniform(0, 1, 75)
    frame = parse_frame(frame_text(person(a), person(b)))
    np.testing.assert_array_equal(frame.body.ravel(), a)


def test_parse_hand_channels(rng):
    left, right = rng.uniform(0, 1, 63), rng.uniform(0, 1, 63)
    frame = parse_frame(frame_text(person(left=left, right=right)))
    np.testing.assert_array_equal(frame.left_hand.ravel(), left)
    np.testing.assert_array_equal(frame.right_hand.ravel(), right)


def test_empty_hand_arrays_mean_undetected():
    rec = person()
    rec["hand_left_keypoints_2d"] = []
    del rec["hand_right_keypoints_2d"]
    frame = parse_frame(frame_text(rec))
    assert not frame.left_hand.any() and not frame.right_hand.any()


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[]",
        '{"persons": []}',
        json.dumps({"people": [{"pose_keypoints_2d": [1.0] * 74}]}),
        json.dumps({"people": [{"hand_left_keypoints_2d": [0.0] * 63}]}),
        json.dumps({"people": [{"pose_keypoints_2d": [0.0, 0.0, 1.5] * 25}]}),
        json.dumps({"people": [{"pose_keypoints_2d": ["a"] * 75}]}),
    ],
)
def test_parse_malformed(text):
    with pytest.raises(ParseError):
        parse_frame(text)


def test_round_trip(rng):
    pts = rng.uniform(0, 640, (67, 3))
    pts[:, 2] = rng.uniform(0, 1, 67)
    frame = FrameKeypoints.from_stacked(pts, 7)
    again = parse_frame(frame_to_json(frame), 7)
    assert again == frame


def test_parse_is_pure():
    text = frame_text(person([1.0, 2.0, 0.5] * 25))
    assert parse_frame(text) == parse_frame(text)


def test_load_sequence_length(tmp_path):
    seq = synth_raw_sequence(1, n_frames=86)
    paths = write_sequence(seq, tmp_path)
    loaded = load_sequence(paths)
    assert len(loaded) == 86
    np.testing.assert_array_equal(loaded.keypoints, seq.keypoints)


def test_load_sequence_gap(tmp_path):
    seq = synth_raw_sequence(2, n_frames=10)
    paths = write_sequence(seq, tmp_path)
    with open(paths[5], "w") as fh:
        fh.write(frame_text())
    loaded = load_sequence(paths)
    assert len(loaded) == 10
    assert not loaded.keypoints[5].any()
    np.testing.assert_array_equal(loaded.keypoints[4], seq.keypoints[4])
    assert list(loaded.frame_indices) == list(range(10))


def test_load_sequence_malformed_file_is_a_gap(tmp_path):
    paths = write_sequence(synth_raw_sequence(2, n_frames=4), tmp_path)
    with open(paths[0], "w") as fh:
        fh.write("{broken")
    loaded = load_sequence(paths)
    assert len(loaded) == 4 and not loaded.keypoints[0].any()


def test_load_sequence_empty(tmp_path):
    with pytest.raises(EmptySequenceError):
        load_sequence([])
    p = tmp_path / "f.json"
    p.write_text(frame_text())
    with pytest.raises(EmptySequenceError):
        load_sequence([p])
