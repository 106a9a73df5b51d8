"""Turning raw pose sequences into fixed-length normalized signs.

Pipeline order: gap repair, per-frame neck centering and shoulder scaling,
dominant-hand detection, mirroring of left-handed signers, joint selection,
linear resampling to a fixed length and median smoothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateSkeletonError, EmptySequenceError, TooManyGapsError
from .joints import (
    L_SHOULDER,
    L_WRIST,
    LEFT_HAND_JOINTS,
    MIRROR_PERMUTATION,
    NECK,
    R_SHOULDER,
    R_WRIST,
    RIGHT_HAND_JOINTS,
    UPPER_BODY,
    Handedness,
    JointSet,
    NormalizedSign,
)
from .pose_io import FrameKeypoints, RawSequence

MIN_SHOULDER_PX = 1e-6


@dataclass(frozen=True)
class PreprocessConfig:
    target_length: int = 86
    median_radius: int = 3
    max_missing_fraction: float = 0.5

    def __post_init__(self):
        if self.target_length < 2:
            raise ValueError("target_length must be at least 2")
        if self.median_radius < 0:
            raise ValueError("median_radius must be nonnegative")
        if not 0.0 <= self.max_missing_fraction <= 1.0:
            raise ValueError("max_missing_fraction must lie in [0, 1]")


def fill_missing(
    seq: RawSequence,
    max_missing_fraction: float = 0.5,
    required: Sequence[int] = UPPER_BODY,
) -> RawSequence:
    """Linearly interpolate undetected keypoints over time.

    Keypoints with zero confidence are replaced by interpolation between
    the nearest detected frames, or by the nearest detected value at the
    edges, and get confidence 1.0. Joints never detected are left as they
    are.

    Raises
    ------
    TooManyGapsError
        A joint listed in ``required`` is missing in more than
        ``max_missing_fraction`` of the frames.
    """
    points = seq.keypoints.copy()
    n = len(points)
    detected = points[:, :, 2] > 0
    missing_frac = 1.0 - detected.mean(axis=0)
    bad = [j for j in required if missing_frac[j] > max_missing_fraction]
    if bad:
        raise TooManyGapsError(
            f"joints {bad} missing in more than {max_missing_fraction:.0%} of {n} frames"
        )

    t = np.arange(n, dtype=np.float64)
    for j in np.flatnonzero(~detected.all(axis=0) & detected.any(axis=0)):
        have = detected[:, j]
        gaps = ~have
        for c in (0, 1):
            # np.interp holds the end values beyond the first/last sample
            points[gaps, j, c] = np.interp(t[gaps], t[have], points[have, j, c])
        points[gaps, j, 2] = 1.0
    return seq.replace(points)


def _center_scale_array(points: np.ndarray) -> np.ndarray:
    """Vectorized centering and scaling over ``(..., 67, 3)`` arrays."""
    neck = points[..., NECK, :2]
    width = np.linalg.norm(points[..., L_SHOULDER, :2] - points[..., R_SHOULDER, :2], axis=-1)
    if np.any(width < MIN_SHOULDER_PX):
        raise DegenerateSkeletonError("shoulder distance below 1e-6 px")
    out = points.copy()
    out[..., :2] = (points[..., :2] - neck[..., None, :]) / width[..., None, None]
    return out


def center_scale(frame: FrameKeypoints) -> FrameKeypoints:
    """Express a frame relative to the neck in shoulder-width units.

    >>> frame = FrameKeypoints.missing()
    >>> frame.body[1] = (100, 100, 1); frame.body[2] = (80, 100, 1); frame.body[5] = (120, 100, 1)
    >>> frame.body[0] = (100, 140, 1)
    >>> center_scale(frame).body[0, :2].tolist()
    [0.0, 1.0]
    """
    if not all(frame.body[j, 2] > 0 for j in (NECK, R_SHOULDER, L_SHOULDER)):
        raise DegenerateSkeletonError("neck or shoulders undetected")
    return FrameKeypoints.from_stacked(_center_scale_array(frame.stacked()), frame.frame_index)


def center_scale_sequence(seq: RawSequence) -> RawSequence:
    """Apply :func:`center_scale` to every frame, each with its own shoulder width."""
    points = seq.keypoints
    anchors = points[:, [NECK, R_SHOULDER, L_SHOULDER], 2]
    if np.any(anchors <= 0):
        raise DegenerateSkeletonError("neck or shoulders undetected in some frame")
    return seq.replace(_center_scale_array(points))


def _mean_speed(track: np.ndarray) -> float:
    return float(np.linalg.norm(np.diff(track, axis=0), axis=-1).mean())


def detect_handedness(seq: RawSequence) -> Handedness:
    """Pick the hand whose wrist moves more on average; ties go to the right."""
    if len(seq) < 2:
        raise EmptySequenceError("handedness needs at least two frames")
    right = _mean_speed(seq.keypoints[:, R_WRIST, :2])
    left = _mean_speed(seq.keypoints[:, L_WRIST, :2])
    return Handedness.LEFT if left > right else Handedness.RIGHT


def mirror(seq: RawSequence) -> RawSequence:
    """Flip horizontally about x = 0 and swap left/right joint labels."""
    points = seq.keypoints[:, MIRROR_PERMUTATION].copy()
    points[:, :, 0] = -points[:, :, 0]
    return seq.replace(points)


def resample(series: np.ndarray, target: int) -> np.ndarray:
    """Linearly resample along axis 0 so that ``len(result) == target``.

    Output sample ``i`` reads source position ``i * (N - 1) / (target - 1)``.
    """
    series = np.asarray(series, dtype=np.float64)
    n = len(series)
    if n < 2:
        raise EmptySequenceError("resampling needs at least two frames")
    if target < 2:
        raise ValueError("target length must be at least 2")
    if n == target:
        return series.copy()
    pos = np.arange(target) * ((n - 1) / (target - 1))
    lo = np.minimum(np.floor(pos).astype(np.int64), n - 2)
    frac = (pos - lo).reshape((-1,) + (1,) * (series.ndim - 1))
    return series[lo] * (1.0 - frac) + series[lo + 1] * frac


def median_smooth(series: np.ndarray, radius: int) -> np.ndarray:
    """Running median over a ``2 * radius + 1`` window along axis 0.

    The series is padded by repeating its first and last samples, so the
    output has the input's length.
    """
    series = np.asarray(series, dtype=np.float64)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius == 0 or len(series) == 0:
        return series.copy()
    shape = series.shape
    flat = series.reshape(len(series), -1)
    padded = np.pad(flat, ((radius, radius), (0, 0)), mode="edge")
    windows = sliding_window_view(padded, 2 * radius + 1, axis=0)
    return np.median(windows, axis=-1).reshape(shape)


def normalize_pipeline(
    seq: RawSequence,
    js: JointSet,
    cfg: PreprocessConfig = PreprocessConfig(),
    gloss: str = "",
    signer: str = "",
) -> NormalizedSign:
    """Run the full normalization chain on one raw recording."""
    if len(seq) < 2:
        raise EmptySequenceError("a sign needs at least two frames")
    detected = seq.keypoints[:, :, 2] > 0
    filled = fill_missing(seq, cfg.max_missing_fraction, UPPER_BODY)
    centered = center_scale_sequence(filled)
    hand = detect_handedness(centered)
    if js.uses_hand:
        fingers = LEFT_HAND_JOINTS if hand is Handedness.LEFT else RIGHT_HAND_JOINTS
        frac = 1.0 - detected[:, list(fingers)].mean(axis=0)
        if np.any(frac > cfg.max_missing_fraction):
            raise TooManyGapsError(
                f"dominant hand joints missing in more than {cfg.max_missing_fraction:.0%} of frames"
            )
    if hand is Handedness.LEFT:
        centered = mirror(centered)
    coords = centered.keypoints[:, list(js.index_list), :2]
    coords = resample(coords, cfg.target_length)
    coords = median_smooth(coords, cfg.median_radius)
    return NormalizedSign(coords, js, hand, gloss, signer)
