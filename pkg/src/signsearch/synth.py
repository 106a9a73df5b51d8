"""Synthetic signs with known ground truth.

Each gloss is a smooth prototype trajectory; each performance of it is the
prototype under a random monotone time warp, with rest frames held at the
start and end and Gaussian jitter on top. Everything is drawn from
``SeedSequence`` streams keyed by (seed, gloss, signer), so adding signers
or glosses never changes the data already generated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .joints import (
    L_ELBOW,
    L_SHOULDER,
    L_WRIST,
    NECK,
    NOSE,
    R_ELBOW,
    R_SHOULDER,
    R_WRIST,
    RIGHT_HAND_JOINTS,
    LEFT_HAND_JOINTS,
    Handedness,
    JointSet,
    NormalizedSign,
)
from .pose_io import N_JOINTS, RawSequence
from .preprocess import median_smooth

LEXICON_SIGNER = "lex"


def signer_name(i: int) -> str:
    return f"p{i + 1:02d}"


@dataclass(frozen=True)
class _Prototype:
    base: np.ndarray  # (J, 2)
    amp: np.ndarray  # (2, J, 2)
    freq: np.ndarray
    phase: np.ndarray

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)[:, None, None, None]
        waves = self.amp * np.sin(2 * np.pi * self.freq * t + self.phase)
        return self.base + waves.sum(axis=1)

    @property
    def scale(self) -> float:
        return float(np.mean(self.amp))


def _prototype(seed: int, gloss: int, n_joints: int) -> _Prototype:
    # every gloss shares one rest skeleton; only the motion differs
    base = np.random.default_rng([seed, 5]).uniform(-1.0, 1.0, (n_joints, 2))
    rng = np.random.default_rng([seed, 0, gloss])
    shape = (2, n_joints, 2)
    return _Prototype(
        base=base,
        amp=rng.uniform(0.2, 1.0, shape),
        freq=rng.uniform(0.5, 2.0, shape),
        phase=rng.uniform(0.0, 2 * np.pi, shape),
    )


def _instance_times(rng: np.random.Generator, length: int, max_stretch: float, max_pad: float) -> np.ndarray:
    """Sample times in [0, 1] for one performance: rest, warped motion, rest."""
    lead = int(round(rng.uniform(0, max_pad) * length))
    tail = int(round(rng.uniform(0, max_pad) * length))
    core = max(2, length - lead - tail)
    steps = 1.0 + max_stretch * rng.uniform(-1.0, 1.0, core - 1)
    cum = np.concatenate([[0.0], np.cumsum(steps)])
    warped = cum / cum[-1]
    times = np.concatenate([np.zeros(lead), warped, np.ones(tail)])
    return times[:length]


def synth_sign(
    gloss_id: int,
    signer_id: int,
    seed: int,
    joint_set: JointSet = JointSet.DOMINANT_ARM_5,
    jitter: float = 0.1,
    length: int = 86,
    max_stretch: float = 0.15,
    max_pad: float = 0.1,
    median_radius: int = 3,
    gloss: str | None = None,
    signer: str | None = None,
) -> NormalizedSign:
    """One performance of gloss ``gloss_id`` by signer ``signer_id`` (-1 = lexicon)."""
    proto = _prototype(seed, gloss_id, joint_set.joint_count)
    rng = np.random.default_rng([seed, 1, signer_id + 1, gloss_id])
    times = _instance_times(rng, length, max_stretch, max_pad)
    frames = proto(times)
    if jitter > 0:
        frames = frames + rng.normal(0.0, jitter * proto.scale, frames.shape)
    frames = median_smooth(frames, median_radius)
    return NormalizedSign(
        frames,
        joint_set,
        Handedness.RIGHT,
        gloss if gloss is not None else f"g{gloss_id:04d}",
        signer if signer is not None else (LEXICON_SIGNER if signer_id < 0 else signer_name(signer_id)),
    )


@dataclass
class SynthData:
    lexicon: list[NormalizedSign]
    queries: list[NormalizedSign]
    labels: list[str]


def synth_lexicon(
    n_glosses: int,
    n_signers: int,
    jitter: float,
    seed: int,
    joint_set: JointSet = JointSet.DOMINANT_ARM_5,
    length: int = 86,
    max_stretch: float = 0.15,
    max_pad: float = 0.1,
    median_radius: int = 3,
) -> SynthData:
    """A lexicon signer's performance of every gloss, plus ``n_signers`` query signers.

    ``labels[i]`` is the true gloss of ``queries[i]``. With ``jitter``,
    ``max_stretch`` and ``max_pad`` all zero every query equals its
    lexicon entry.
    """
    if n_glosses < 2:
        raise ValueError("need at least two glosses")
    kw = dict(
        seed=seed, joint_set=joint_set, jitter=jitter, length=length,
        max_stretch=max_stretch, max_pad=max_pad, median_radius=median_radius,
    )
    lexicon = [synth_sign(g, -1, **kw) for g in range(n_glosses)]
    queries = [synth_sign(g, s, **kw) for s in range(n_signers) for g in range(n_glosses)]
    return SynthData(lexicon, queries, [q.gloss for q in queries])


def synth_raw_sequence(
    seed: int,
    n_frames: int = 60,
    handedness: Handedness = Handedness.RIGHT,
    offset: tuple[float, float] = (320.0, 180.0),
    shoulder_px: float = 120.0,
) -> RawSequence:
    """Pixel-space keypoints of a signer moving the dominant arm, all joints detected.

    Used for exercising ingestion end to end; the non-dominant arm drifts
    slowly so that handedness detection has a clear answer.
    """
    rng = np.random.default_rng([seed, 2])
    t = np.linspace(0.0, 1.0, n_frames)
    half = shoulder_px / 2
    pts = np.zeros((n_frames, N_JOINTS, 3))
    pts[:, :, 2] = 0.9

    def place(j, x, y):
        pts[:, j, 0] = offset[0] + x
        pts[:, j, 1] = offset[1] + y

    freq = rng.uniform(0.5, 1.5, 4)
    phase = rng.uniform(0, 2 * np.pi, 4)
    wave = [np.sin(2 * np.pi * f * t + p) for f, p in zip(freq, phase)]

    place(NECK, 0.0, 0.0)
    place(NOSE, 0.0, -0.6 * shoulder_px)
    # image x grows to the viewer's right, so the signer's right side has smaller x
    place(R_SHOULDER, -half, 0.0)
    place(L_SHOULDER, half, 0.0)
    active = 0.5 * shoulder_px
    idle = 0.02 * shoulder_px
    dom, non = (1, -1) if handedness is Handedness.RIGHT else (-1, 1)
    arms = {
        1: (R_ELBOW, R_WRIST, RIGHT_HAND_JOINTS),
        -1: (L_ELBOW, L_WRIST, LEFT_HAND_JOINTS),
    }
    for side, amp in ((dom, active), (non, idle)):
        elbow, wrist, hand = arms[side]
        sx = -side * half
        ex, ey = sx - side * 0.3 * shoulder_px + amp * 0.3 * wave[0], 0.8 * shoulder_px + amp * 0.3 * wave[1]
        wx, wy = ex + amp * wave[2], ey - 0.6 * shoulder_px + amp * wave[3]
        place(elbow, ex, ey)
        place(wrist, wx, wy)
        for k, j in enumerate(hand):
            ang = 2 * np.pi * k / len(hand)
            radius = 0.05 * shoulder_px * (1 + k % 4)
            place(j, wx + radius * np.cos(ang + wave[0]), wy + radius * np.sin(ang + wave[1]))
    # remaining body joints: hips and legs hang still
    for j in range(8, 25):
        place(j, (j % 3 - 1) * 0.3 * shoulder_px, 2.0 * shoulder_px + 0.1 * j)
    return RawSequence(pts, source_id=f"synth{seed}")
