"""Joint sets and the normalized sign container."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .pose_io import N_BODY, N_HAND

NOSE, NECK = 0, 1
R_SHOULDER, R_ELBOW, R_WRIST = 2, 3, 4
L_SHOULDER, L_ELBOW, L_WRIST = 5, 6, 7
UPPER_BODY = (NOSE, NECK, R_SHOULDER, R_ELBOW, R_WRIST, L_SHOULDER, L_ELBOW, L_WRIST)

LEFT_HAND_JOINTS = tuple(range(N_BODY, N_BODY + N_HAND))
RIGHT_HAND_JOINTS = tuple(range(N_BODY + N_HAND, N_BODY + 2 * N_HAND))

# BODY_25 left/right counterparts: shoulders, elbows, wrists, hips, knees,
# ankles, eyes, ears, big toes, small toes, heels
_BODY_PAIRS = (
    (2, 5), (3, 6), (4, 7), (9, 12), (10, 13), (11, 14),
    (15, 16), (17, 18), (19, 22), (20, 23), (21, 24),
)


def _mirror_permutation() -> np.ndarray:
    perm = np.arange(N_BODY + 2 * N_HAND)
    for a, b in _BODY_PAIRS:
        perm[a], perm[b] = b, a
    perm[list(LEFT_HAND_JOINTS)] = RIGHT_HAND_JOINTS
    perm[list(RIGHT_HAND_JOINTS)] = LEFT_HAND_JOINTS
    return perm


MIRROR_PERMUTATION = _mirror_permutation()


class Handedness(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"


class JointSet(enum.Enum):
    """Skeletal conditions a sign can be represented with.

    The dominant hand always sits in the right-side slots once a sequence
    has been mirrored, so index lists only reference right-side joints for
    the dominant arm.
    """

    UPPER_BODY_29 = "upper29"
    DOMINANT_ARM_5 = "arm5"
    DOMINANT_WRIST_1 = "wrist1"

    @property
    def index_list(self) -> tuple[int, ...]:
        if self is JointSet.UPPER_BODY_29:
            return UPPER_BODY + RIGHT_HAND_JOINTS
        if self is JointSet.DOMINANT_ARM_5:
            return (NOSE, NECK, R_SHOULDER, R_ELBOW, R_WRIST)
        return (R_WRIST,)

    @property
    def joint_count(self) -> int:
        return len(self.index_list)

    @property
    def uses_hand(self) -> bool:
        return self is JointSet.UPPER_BODY_29

    @classmethod
    def parse(cls, text: str) -> JointSet:
        for js in cls:
            if text in (js.value, js.name):
                return js
        raise ValueError(f"unknown joint set {text!r}; choose from {[j.value for j in cls]}")


@dataclass(eq=False)
class NormalizedSign:
    """A sign as ``(T, J, 2)`` neck-relative coordinates in shoulder-width units."""

    frames: np.ndarray
    joint_set: JointSet
    handedness: Handedness = Handedness.RIGHT
    gloss: str = ""
    signer: str = ""

    def __post_init__(self):
        self.frames = np.asarray(self.frames)
        if not np.issubdtype(self.frames.dtype, np.floating):
            self.frames = self.frames.astype(np.float64)
        expected = (self.joint_set.joint_count, 2)
        if self.frames.ndim != 3 or self.frames.shape[1:] != expected:
            raise ValueError(f"expected (T, {expected[0]}, 2) frames, got {self.frames.shape}")
        if not np.all(np.isfinite(self.frames)):
            raise ValueError("normalized sign contains non-finite values")
        self.handedness = Handedness(self.handedness)

    @property
    def length(self) -> int:
        return self.frames.shape[0]

    def flat(self) -> np.ndarray:
        return self.frames.reshape(-1).astype(np.float64)

    def __eq__(self, other):
        if not isinstance(other, NormalizedSign):
            return NotImplemented
        return (
            self.joint_set is other.joint_set
            and self.handedness == other.handedness
            and self.gloss == other.gloss
            and self.signer == other.signer
            and self.frames.shape == other.frames.shape
            and np.array_equal(self.frames, other.frames)
        )
