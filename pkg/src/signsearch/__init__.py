"""Training-free sign retrieval for sign language lexica from pose keypoints."""

from .distance import DtwParams, distance_matrix, dtw_full, dtw_obe, euclidean_flat, frame_distance
from .evaluate import (
    BackendConfig,
    EvalReport,
    InstanceCurve,
    RankedList,
    incremental_instance_eval,
    rank,
    rank_batch,
    run_condition_eval,
    topk_hit,
)
from .joints import Handedness, JointSet, NormalizedSign
from .lexicon import LexiconIndex, add_instances, build_index, glosses, load_index, save_index
from .pose_io import FrameKeypoints, RawSequence, load_sequence, parse_frame
from .preprocess import PreprocessConfig, normalize_pipeline
from .synth import synth_lexicon

__version__ = "0.1.0"
