"""Reading per-frame pose-estimator JSON output into raw keypoint sequences.

Each frame file holds a ``people`` array; every person carries flat
``[x0, y0, c0, x1, y1, c1, ...]`` arrays for the body (BODY_25 layout) and
both hands. Face and foot arrays, when present, are ignored.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import EmptyFrameError, EmptySequenceError, ParseError

logger = logging.getLogger(__name__)

N_BODY = 25
N_HAND = 21
N_JOINTS = N_BODY + 2 * N_HAND

# offsets of each part inside the stacked (67, 3) layout
BODY = slice(0, N_BODY)
LEFT_HAND = slice(N_BODY, N_BODY + N_HAND)
RIGHT_HAND = slice(N_BODY + N_HAND, N_JOINTS)

_KEYS = {
    "pose_keypoints_2d": (BODY, N_BODY),
    "hand_left_keypoints_2d": (LEFT_HAND, N_HAND),
    "hand_right_keypoints_2d": (RIGHT_HAND, N_HAND),
}


class Keypoint2D(NamedTuple):
    x: float
    y: float
    confidence: float


@dataclass(eq=False)
class FrameKeypoints:
    """Keypoints of one person in one frame.

    Undetected joints are kept in place with ``confidence == 0``.
    """

    body: np.ndarray
    left_hand: np.ndarray
    right_hand: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        self.body = np.asarray(self.body, dtype=np.float64).reshape(N_BODY, 3)
        self.left_hand = np.asarray(self.left_hand, dtype=np.float64).reshape(N_HAND, 3)
        self.right_hand = np.asarray(self.right_hand, dtype=np.float64).reshape(N_HAND, 3)

    @classmethod
    def from_stacked(cls, points: np.ndarray, frame_index: int = 0) -> FrameKeypoints:
        points = np.asarray(points, dtype=np.float64)
        return cls(points[BODY], points[LEFT_HAND], points[RIGHT_HAND], frame_index)

    @classmethod
    def missing(cls, frame_index: int = 0) -> FrameKeypoints:
        return cls.from_stacked(np.zeros((N_JOINTS, 3)), frame_index)

    def stacked(self) -> np.ndarray:
        """Return a ``(67, 3)`` array: body, then left hand, then right hand."""
        return np.concatenate([self.body, self.left_hand, self.right_hand])

    def keypoint(self, part: str, index: int) -> Keypoint2D:
        row = getattr(self, part)[index]
        return Keypoint2D(float(row[0]), float(row[1]), float(row[2]))

    def __eq__(self, other):
        if not isinstance(other, FrameKeypoints):
            return NotImplemented
        return self.frame_index == other.frame_index and np.array_equal(
            self.stacked(), other.stacked()
        )


@dataclass(eq=False)
class RawSequence:
    """Ordered raw keypoints of one recording.

    ``keypoints`` has shape ``(n_frames, 67, 3)`` in pixel units with the
    confidence in the last channel.
    """

    keypoints: np.ndarray
    source_id: str = ""
    frame_indices: np.ndarray = field(default=None)

    def __post_init__(self):
        self.keypoints = np.asarray(self.keypoints, dtype=np.float64)
        if self.keypoints.ndim != 3 or self.keypoints.shape[1:] != (N_JOINTS, 3):
            raise ValueError(f"expected (n, {N_JOINTS}, 3) keypoints, got {self.keypoints.shape}")
        if len(self.keypoints) == 0:
            raise EmptySequenceError("a raw sequence needs at least one frame")
        if self.frame_indices is None:
            self.frame_indices = np.arange(len(self.keypoints))
        self.frame_indices = np.asarray(self.frame_indices, dtype=np.int64)
        if np.any(np.diff(self.frame_indices) <= 0):
            raise ValueError("frame indices must be strictly increasing")

    @classmethod
    def from_frames(cls, frames: Sequence[FrameKeypoints], source_id: str = "") -> RawSequence:
        if not frames:
            raise EmptySequenceError("a raw sequence needs at least one frame")
        return cls(
            np.stack([f.stacked() for f in frames]),
            source_id,
            np.array([f.frame_index for f in frames]),
        )

    @property
    def frames(self) -> list[FrameKeypoints]:
        return [
            FrameKeypoints.from_stacked(p, int(i))
            for p, i in zip(self.keypoints, self.frame_indices)
        ]

    def replace(self, keypoints: np.ndarray) -> RawSequence:
        return RawSequence(keypoints, self.source_id, self.frame_indices.copy())

    def __len__(self):
        return len(self.keypoints)


def _triples(values, count: int, key: str) -> np.ndarray:
    if values is None or (isinstance(values, list) and len(values) == 0):
        # hand detection disabled or hand not found
        return np.zeros((count, 3))
    try:
        arr = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{key}: non-numeric entries") from exc
    if arr.shape != (3 * count,):
        raise ParseError(f"{key}: expected {3 * count} numbers, got shape {arr.shape}")
    arr = arr.reshape(count, 3)
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{key}: non-finite values")
    if np.any((arr[:, 2] < 0) | (arr[:, 2] > 1)):
        raise ParseError(f"{key}: confidence outside [0, 1]")
    return arr


def parse_frame(text: str, frame_index: int = 0) -> FrameKeypoints:
    """Parse one frame file and return the keypoints of its first person.

    Raises
    ------
    ParseError
        The text is not a valid frame record.
    EmptyFrameError
        The record lists no people.
    """
    try:
        record = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(record, dict) or not isinstance(record.get("people"), list):
        raise ParseError('frame record must be an object with a "people" array')
    people = record["people"]
    if not people:
        raise EmptyFrameError("no people detected")
    person = people[0]
    if not isinstance(person, dict):
        raise ParseError("person entry must be an object")
    if "pose_keypoints_2d" not in person or not person["pose_keypoints_2d"]:
        raise ParseError("person entry lacks pose_keypoints_2d")

    points = np.zeros((N_JOINTS, 3))
    for key, (part, count) in _KEYS.items():
        points[part] = _triples(person.get(key), count, key)
    return FrameKeypoints.from_stacked(points, frame_index)


def frame_to_json(frame: FrameKeypoints) -> str:
    """Serialize a frame back to the single-person frame schema."""
    person = {
        "pose_keypoints_2d": frame.body.ravel().tolist(),
        "hand_left_keypoints_2d": frame.left_hand.ravel().tolist(),
        "hand_right_keypoints_2d": frame.right_hand.ravel().tolist(),
    }
    return json.dumps({"version": 1.3, "people": [person]})


def load_sequence(frame_files: Sequence[str | os.PathLike], source_id: str | None = None) -> RawSequence:
    """Load an ordered list of frame files into a RawSequence.

    Frames that cannot be used (no person, or malformed) become all-zero
    confidence gaps so the sequence keeps one frame per file; gaps are
    repaired later by :func:`signsearch.preprocess.fill_missing`.
    """
    frame_files = list(frame_files)
    frames = []
    n_ok = 0
    for i, path in enumerate(frame_files):
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            frames.append(parse_frame(text, i))
            n_ok += 1
        except EmptyFrameError:
            frames.append(FrameKeypoints.missing(i))
        except ParseError as exc:
            logger.warning("%s: %s; treating as a gap", path, exc)
            frames.append(FrameKeypoints.missing(i))
    if n_ok == 0:
        raise EmptySequenceError("no frame with a detected person")
    if source_id is None:
        source_id = os.path.basename(os.path.dirname(os.fspath(frame_files[0])))
    return RawSequence.from_frames(frames, source_id)


def write_sequence(seq: RawSequence, directory: str | os.PathLike, prefix: str = "frame") -> list[str]:
    """Write one frame file per frame, named so that sorting restores the order."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for i, frame in enumerate(seq.frames):
        path = os.path.join(os.fspath(directory), f"{prefix}_{i:012d}_keypoints.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(frame_to_json(frame))
        paths.append(path)
    return paths
