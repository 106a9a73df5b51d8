import numpy as np
import pytest
from conftest import random_sign

from signsearch import evaluate as ev
from signsearch.embedding import UmapParams
from signsearch.errors import ConfigError, JointSetMismatchError, ParamError
from signsearch.evaluate import (
    BackendConfig,
    RankedItem,
    RankedList,
    incremental_instance_eval,
    leave_one_out_instance_eval,
    rank,
    ranked_from_distances,
    run_condition_eval,
    topk_hit,
)
from signsearch.joints import JointSet
from signsearch.lexicon import add_instances, build_index, from_signs
from signsearch.synth import synth_lexicon, synth_sign

JS = JointSet.DOMINANT_ARM_5


@pytest.fixture(scope="module")
def small():
    data = synth_lexicon(12, 3, 0.3, seed=1, joint_set=JS)
    return data, from_signs(data.lexicon)


def ranked(*glosses):
    return RankedList([RankedItem(g, "s", 1, float(i)) for i, g in enumerate(glosses)])


def test_rank_identical_entry_first(small):
    data, index = small
    r = rank(index.entries[5].sign, index)
    assert r[0].gloss == data.lexicon[5].gloss and r[0].distance == 0
    assert len(r) == 12


@pytest.mark.parametrize("method", ["dtw", "euclidean", "pca"])
def test_rank_float64_query_matches_stored_copy(small, method):
    data, index = small
    r = rank(data.lexicon[3], index, BackendConfig(method))
    assert r[0].gloss == data.lexicon[3].gloss and r[0].distance < 1e-9


def test_collapsed_keeps_minimum(rng):
    signs = [random_sign(rng, JointSet.DOMINANT_WRIST_1, 4) for _ in range(3)]
    index = build_index([("A", "x", signs[0]), ("B", "x", signs[1]), ("A", "y", signs[2])])
    r = ranked_from_distances(index, np.array([4.0, 3.0, 2.5]))
    assert [(it.gloss, it.distance) for it in r] == [("A", 2.5), ("B", 3.0)]
    assert r[0].signer == "y"
    full = ranked_from_distances(index, np.array([4.0, 3.0, 2.5]), collapsed=False)
    assert [it.distance for it in full] == [2.5, 3.0, 4.0]


def test_ties_are_lexicographic(rng):
    s = random_sign(rng, JointSet.DOMINANT_WRIST_1, 4)
    index = build_index([("b", "x", s), ("a", "y", s), ("a", "x", s)])
    r = ranked_from_distances(index, np.zeros(3), collapsed=False)
    assert [(it.gloss, it.signer) for it in r] == [("a", "x"), ("a", "y"), ("b", "x")]


def test_rank_joint_set_mismatch(small, rng):
    _, index = small
    with pytest.raises(JointSetMismatchError):
        rank(random_sign(rng, JointSet.DOMINANT_WRIST_1), index)


def test_rank_umap_index_too_small(small):
    data, index = small
    with pytest.raises(ParamError):
        rank(data.queries[0], index, BackendConfig("umap", umap=UmapParams(seed=0, n_neighbors=15)))


def test_topk_hit_examples():
    r = ranked(*[f"g{i}" for i in range(20)])
    assert topk_hit(r, "g0", 10)
    assert not topk_hit(r, "g10", 10)
    assert topk_hit(r, "g10", 11)
    assert not any(topk_hit(r, "zzz", k) for k in (1, 10, 20, 50))
    assert topk_hit(r, "g19", len(r))


def test_topk_hit_expanded_counts_glosses():
    r = ranked("a", "a", "a", "b")
    assert topk_hit(r, "b", 2)


def test_perfect_queries(small):
    data, index = small
    report = run_condition_eval(
        {JS: data.lexicon}, {JS: index}, [BackendConfig("dtw"), BackendConfig("euclidean")]
    )
    assert all(acc == 1.0 for *_, acc, _ in report.rows)
    assert len(report.rows) == 8


def test_pooled_arithmetic(monkeypatch, rng):
    # 8 participants x 20 signs; 14 of each participant's signs hit -> 112 / 160
    signs = []
    for p in range(8):
        for g in range(20):
            s = random_sign(rng, JointSet.DOMINANT_WRIST_1, 4, gloss=f"g{g}", signer=f"p{p}")
            signs.append(s)
    index = build_index([(f"g{g}", "lex", signs[g]) for g in range(20)])

    def fake_rank_batch(queries, index, backend):
        out = []
        for q in queries:
            hit = int(q.gloss[1:]) < 14
            order = [q.gloss] + [f"x{i}" for i in range(20)] if hit else [f"x{i}" for i in range(20)] + [q.gloss]
            out.append(ranked(*order))
        return out

    monkeypatch.setattr(ev, "rank_batch", fake_rank_batch)
    report = run_condition_eval({JointSet.DOMINANT_WRIST_1: signs}, {JointSet.DOMINANT_WRIST_1: index},
                                [BackendConfig("dtw")], ks=(10,))
    assert report.accuracy("dtw", "wrist1", 10) == pytest.approx(0.7)


def test_unknown_gloss(small, rng):
    _, index = small
    q = random_sign(rng, JS, gloss="nope", signer="p1")
    with pytest.raises(ConfigError):
        run_condition_eval({JS: [q]}, {JS: index}, [BackendConfig()])


def test_monotone_in_k_and_deterministic(small):
    data, index = small
    backends = [BackendConfig("dtw"), BackendConfig("pca"), BackendConfig("umap", umap=UmapParams(seed=3, n_neighbors=5))]
    a = run_condition_eval({JS: data.queries}, {JS: index}, backends, ks=(1, 2, 5, 12), seed=9)
    b = run_condition_eval({JS: data.queries}, {JS: index}, backends, ks=(1, 2, 5, 12), seed=9)
    assert a.to_csv() == b.to_csv()
    for backend in ("dtw", "pca", "umap"):
        accs = [a.accuracy(backend, JS, k) for k in (1, 2, 5, 12)]
        assert accs == sorted(accs) and accs[-1] == 1.0


def test_noise_injection(small):
    data, index = small
    report = run_condition_eval({JS: data.queries}, {JS: index}, [BackendConfig()], ks=(1,), noise=True, seed=4)
    noise = report.metadata["noise_participants"]
    assert sorted(noise) == ["p01", "p02", "p03"]
    assert all(k != v for k, v in noise.items())
    assert report.rows[0][4] == len(index) + 12
    again = run_condition_eval({JS: data.queries}, {JS: index}, [BackendConfig()], ks=(1,), noise=True, seed=4)
    assert again.metadata == report.metadata


def test_report_csv_columns(small):
    data, index = small
    report = run_condition_eval({JS: data.queries[:3]}, {JS: index}, [BackendConfig()], ks=(1, 10), seed=2)
    lines = report.to_csv().splitlines()
    assert lines[0] == "backend,joint_set,k,accuracy,lexicon_size,seed"
    assert lines[1].startswith("dtw,arm5,1,") and lines[1].endswith(",12,2")
    assert len(lines) == 3


def donors_for(n_donors, first_signer, seed=1, jitter=0.3, n_glosses=12):
    return [synth_sign(g, first_signer + d, seed, JS, jitter) for d in range(n_donors) for g in range(n_glosses)]


def test_incremental_m0_matches_condition_eval(small):
    data, index = small
    curve = incremental_instance_eval(data.queries, index, donors_for(2, 3), BackendConfig(), ks=(1, 10))
    base = run_condition_eval({JS: data.queries}, {JS: index}, [BackendConfig()], ks=(1, 10))
    assert curve.curves[1][0] == base.accuracy("dtw", JS, 1)
    assert curve.curves[10][0] == base.accuracy("dtw", JS, 10)
    assert len(curve.curves[1]) == 3
    assert curve.lexicon_sizes == [12, 24, 36]
    assert sorted(curve.donor_order) == ["p04", "p05"]


def test_incremental_rejects_overlap(small):
    data, index = small
    with pytest.raises(ConfigError):
        incremental_instance_eval(data.queries, index, data.queries[:12], BackendConfig())
    with pytest.raises(ConfigError):
        incremental_instance_eval(data.queries, index, [], BackendConfig())


def test_curve_csv(small):
    data, index = small
    curve = incremental_instance_eval(data.queries[:12], index, donors_for(2, 3), BackendConfig(), seed=5)
    lines = curve.to_csv().splitlines()
    assert lines[0] == "backend,joint_set,k,added_participants,accuracy,lexicon_size,seed"
    assert len(lines) == 1 + 2 * 3
    assert [ln.split(",")[3] for ln in lines[1:4]] == ["0", "1", "2"]


def test_leave_one_out(small):
    data, index = small
    curve = leave_one_out_instance_eval(data.queries, index, 2, BackendConfig(), seed=3)
    assert len(curve.curves[1]) == 3 and curve.lexicon_sizes[-1] == 36
    with pytest.raises(ConfigError):
        leave_one_out_instance_eval(data.queries, index, 3, BackendConfig())


def test_adding_instance_never_worsens_rank(small, rng):
    data, index = small
    for q in data.queries[:12]:
        before = rank(q, index).glosses().index(q.gloss)
        extra = synth_sign(int(q.gloss[1:]), 7, 1, JS, 0.3)
        after = rank(q, add_instances(index, [(extra.gloss, extra.signer, extra)])).glosses().index(q.gloss)
        assert after <= before
