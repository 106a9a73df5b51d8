import json

import numpy as np
import pytest

from signsearch.joints import JointSet, NormalizedSign


def person(body=None, left=None, right=None):
    return {
        "pose_keypoints_2d": list(body) if body is not None else [0.0] * 75,
        "hand_left_keypoints_2d": list(left) if left is not None else [0.0] * 63,
        "hand_right_keypoints_2d": list(right) if right is not None else [0.0] * 63,
        "face_keypoints_2d": [1.0] * 210,
    }


def frame_text(*people):
    return json.dumps({"version": 1.3, "people": list(people)})


def random_sign(rng, js=JointSet.DOMINANT_ARM_5, length=86, gloss="g", signer="s"):
    return NormalizedSign(rng.standard_normal((length, js.joint_count, 2)), js, "Right", gloss, signer)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {cid}: {detail}")
