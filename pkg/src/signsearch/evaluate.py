"""Ranking queries against a lexicon and measuring top-k retrieval accuracy."""

from __future__ import annotations

import csv
import enum
import io
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .distance import DtwParams, dtw_batch
from .embedding import EmbeddedSet, UmapParams, embedded_distance_matrix, pca_embed, umap_embed
from .errors import ConfigError, JointSetMismatchError, ParamError
from .joints import JointSet, NormalizedSign
from .lexicon import STORAGE_DTYPE, LexiconIndex, add_instances, glosses

DEFAULT_KS = (1, 10, 20, 50)
REPORT_COLUMNS = ("backend", "joint_set", "k", "accuracy", "lexicon_size", "seed")
CURVE_COLUMNS = ("backend", "joint_set", "k", "added_participants", "accuracy", "lexicon_size", "seed")


class Method(str, enum.Enum):
    DTW = "dtw"
    EUCLIDEAN = "euclidean"
    PCA = "pca"
    UMAP = "umap"


@dataclass(frozen=True)
class BackendConfig:
    method: Method = Method.DTW
    dtw: DtwParams = DtwParams()
    umap: UmapParams | None = None
    collapsed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.method is Method.UMAP and self.umap is None:
            object.__setattr__(self, "umap", UmapParams())

    @property
    def name(self) -> str:
        return self.method.value


class RankedItem(NamedTuple):
    gloss: str
    signer: str
    instance: int
    distance: float


@dataclass
class RankedList:
    items: list[RankedItem]
    collapsed: bool = True

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def glosses(self) -> list[str]:
        """Glosses in rank order, each listed once."""
        return list(dict.fromkeys(item.gloss for item in self.items))


def _order(items: Iterable[RankedItem]) -> list[RankedItem]:
    return sorted(items, key=lambda it: (it.distance, it.gloss, it.signer, it.instance))


def ranked_from_distances(index: LexiconIndex, distances: np.ndarray, collapsed: bool = True) -> RankedList:
    items = [
        RankedItem(e.gloss, e.signer, e.instance, float(d))
        for e, d in zip(index.entries, distances)
    ]
    if collapsed:
        best: dict[str, RankedItem] = {}
        for it in _order(items):
            best.setdefault(it.gloss, it)
        items = list(best.values())
    return RankedList(_order(items), collapsed)


def _as_stored(sign: NormalizedSign) -> np.ndarray:
    # queries are compared at the index's storage precision
    return sign.frames.astype(STORAGE_DTYPE).astype(np.float64)


def _distances(queries: Sequence[NormalizedSign], index: LexiconIndex, backend: BackendConfig) -> np.ndarray:
    for q in queries:
        if q.joint_set is not index.joint_set:
            raise JointSetMismatchError(
                f"query uses {q.joint_set.value}, index uses {index.joint_set.value}"
            )
        if q.length != index.target_length:
            raise JointSetMismatchError(f"query length {q.length} != index length {index.target_length}")
    refs = index.stack()
    if backend.method is Method.DTW:
        return np.stack([dtw_batch(_as_stored(q), refs, backend.dtw) for q in queries])
    flat_refs = refs.reshape(len(refs), -1)
    flat_q = np.stack([_as_stored(q).reshape(-1) for q in queries])
    if backend.method is Method.EUCLIDEAN:
        return np.stack([np.sqrt(np.sum((flat_refs - v) ** 2, axis=1)) for v in flat_q])

    ref_labels = [("ref",) + e.key for e in index.entries]
    query_labels = [("query", i) for i in range(len(queries))]
    data = np.vstack([flat_refs, flat_q])
    if backend.method is Method.PCA:
        emb: EmbeddedSet = pca_embed(data, ref_labels + query_labels)
    else:
        if len(index) < backend.umap.n_neighbors + 1:
            raise ParamError(
                f"UMAP needs at least {backend.umap.n_neighbors + 1} lexicon entries, index has {len(index)}"
            )
        emb = umap_embed(data, ref_labels + query_labels, backend.umap)
    return embedded_distance_matrix(emb, query_labels, ref_labels).values


def rank_batch(
    queries: Sequence[NormalizedSign], index: LexiconIndex, backend: BackendConfig = BackendConfig()
) -> list[RankedList]:
    """Rank the lexicon for several queries at once.

    Embedding backends fit one joint embedding over the lexicon plus all
    of ``queries``, so the result for a query depends on its batch.
    """
    if not queries:
        return []
    dist = _distances(list(queries), index, backend)
    return [ranked_from_distances(index, row, backend.collapsed) for row in dist]


def rank(query: NormalizedSign, index: LexiconIndex, backend: BackendConfig = BackendConfig()) -> RankedList:
    return rank_batch([query], index, backend)[0]


def topk_hit(r: RankedList, target_gloss: str, k: int) -> bool:
    if k < 1:
        raise ValueError("k must be at least 1")
    return target_gloss in r.glosses()[:k]


@dataclass
class EvalReport:
    rows: list[tuple[str, str, int, float, int]] = field(default_factory=list)
    seed: int = 0
    metadata: dict = field(default_factory=dict)

    def accuracy(self, backend: str, joint_set: JointSet | str, k: int) -> float:
        js = joint_set.value if isinstance(joint_set, JointSet) else JointSet.parse(joint_set).value
        for b, j, kk, acc, _ in self.rows:
            if (b, j, kk) == (backend, js, k):
                return acc
        raise KeyError((backend, js, k))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for b, j, k, acc, size in self.rows:
            writer.writerow([b, j, k, f"{acc:.6f}", size, self.seed])
        return buf.getvalue()


def _by_signer(signs: Iterable[NormalizedSign]) -> dict[str, list[NormalizedSign]]:
    groups: dict[str, list[NormalizedSign]] = defaultdict(list)
    for s in signs:
        groups[s.signer].append(s)
    return {k: groups[k] for k in sorted(groups)}


def _check_glosses(queries: Iterable[NormalizedSign], index: LexiconIndex) -> None:
    known = set(glosses(index))
    unknown = sorted({q.gloss for q in queries} - known)
    if unknown:
        raise ConfigError(f"query glosses absent from the lexicon: {unknown[:5]}")


def _items(signs: Iterable[NormalizedSign]):
    return [(s.gloss, s.signer, s) for s in signs]


def noise_assignment(participants: Sequence[str], seed: int) -> dict[str, str]:
    """Pick, for each participant, another participant whose signs join the lexicon."""
    participants = sorted(participants)
    if len(participants) < 2:
        raise ConfigError("noise injection needs at least two participants")
    rng = np.random.default_rng([seed, 3])
    out = {}
    for p in participants:
        others = [q for q in participants if q != p]
        out[p] = others[int(rng.integers(len(others)))]
    return out


def _hits(queries: Sequence[NormalizedSign], index: LexiconIndex, backend: BackendConfig, ks) -> np.ndarray:
    ranked = rank_batch(queries, index, backend)
    return np.array([[topk_hit(r, q.gloss, k) for k in ks] for r, q in zip(ranked, queries)], dtype=np.int64)


def run_condition_eval(
    queries: Mapping[JointSet, Sequence[NormalizedSign]],
    indices: Mapping[JointSet, LexiconIndex],
    backends: Sequence[BackendConfig],
    ks: Sequence[int] = DEFAULT_KS,
    noise: bool = False,
    seed: int = 0,
) -> EvalReport:
    """Top-k accuracy per backend, joint set and k, pooled over all query signs.

    Queries are grouped by signer and each group is ranked as one batch.
    With ``noise`` every group is evaluated against the lexicon extended by
    the signs of one other, randomly chosen, participant.
    """
    ks = sorted(set(int(k) for k in ks))
    report = EvalReport(seed=seed)
    assignment = None
    for js in queries:
        if js not in indices:
            raise ConfigError(f"no index for joint set {js.value}")
        _check_glosses(queries[js], indices[js])
        groups = _by_signer(queries[js])
        if noise:
            if assignment is None:
                assignment = noise_assignment(list(groups), seed)
                report.metadata["noise_participants"] = assignment
        for backend in backends:
            hits = np.zeros(len(ks), dtype=np.int64)
            total = 0
            sizes = set()
            for signer, signs in groups.items():
                index = indices[js]
                if noise:
                    index = add_instances(index, _items(groups[assignment[signer]]))
                sizes.add(len(index))
                hits += _hits(signs, index, backend, ks).sum(axis=0)
                total += len(signs)
            size = max(sizes) if sizes else len(indices[js])
            for k, h in zip(ks, hits):
                report.rows.append((backend.name, js.value, k, float(h / total) if total else 0.0, size))
    return report


@dataclass
class InstanceCurve:
    backend: str
    joint_set: str
    curves: dict[int, list[float]]
    lexicon_sizes: list[int]
    seed: int = 0
    donor_order: list[str] = field(default_factory=list)

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if header:
            writer.writerow(CURVE_COLUMNS)
        for k, accs in sorted(self.curves.items()):
            for m, (acc, size) in enumerate(zip(accs, self.lexicon_sizes)):
                writer.writerow([self.backend, self.joint_set, k, m, f"{acc:.6f}", size, self.seed])
        return buf.getvalue()


def incremental_instance_eval(
    queries: Sequence[NormalizedSign],
    base_index: LexiconIndex,
    donors: Sequence[NormalizedSign],
    backend: BackendConfig,
    ks: Sequence[int] = (1, 10),
    seed: int = 0,
) -> InstanceCurve:
    """Accuracy as other participants' signs are appended to the lexicon one signer at a time.

    Donor signers are added in a seeded random order; point ``m`` of each
    curve uses the first ``m`` donors.
    """
    ks = sorted(set(int(k) for k in ks))
    donor_groups = _by_signer(donors)
    if not donor_groups:
        raise ConfigError("at least one donor participant is required")
    query_groups = _by_signer(queries)
    overlap = sorted(set(donor_groups) & set(query_groups))
    if overlap:
        raise ConfigError(f"participants cannot donate to their own queries: {overlap}")
    _check_glosses(queries, base_index)

    names = list(donor_groups)
    rng = np.random.default_rng([seed, 4])
    order = [names[i] for i in rng.permutation(len(names))]

    steps = [base_index]
    for name in order:
        steps.append(add_instances(steps[-1], _items(donor_groups[name])))
    # pairwise distances do not depend on the rest of the lexicon, and every
    # step is a prefix of the last one, so one matrix serves all steps
    pairwise = backend.method in (Method.DTW, Method.EUCLIDEAN)
    full = {name: _distances(list(signs), steps[-1], backend) for name, signs in query_groups.items()} if pairwise else {}

    curves: dict[int, list[float]] = {k: [] for k in ks}
    sizes = []
    for index in steps:
        hits = np.zeros(len(ks), dtype=np.int64)
        total = 0
        for name, signs in query_groups.items():
            if pairwise:
                ranked = [ranked_from_distances(index, row[: len(index)], backend.collapsed) for row in full[name]]
                hits += np.array([[topk_hit(r, q.gloss, k) for k in ks] for r, q in zip(ranked, signs)]).sum(axis=0)
            else:
                hits += _hits(signs, index, backend, ks).sum(axis=0)
            total += len(signs)
        for k, h in zip(ks, hits):
            curves[k].append(float(h / total))
        sizes.append(len(index))
    return InstanceCurve(backend.name, base_index.joint_set.value, curves, sizes, seed, order)


def leave_one_out_instance_eval(
    queries: Sequence[NormalizedSign],
    base_index: LexiconIndex,
    n_donors: int,
    backend: BackendConfig,
    ks: Sequence[int] = (1, 10),
    seed: int = 0,
) -> InstanceCurve:
    """Instance curves where each participant's donors are drawn from the other participants.

    Curves are pooled over all query signs, weighting every participant by
    the number of signs they performed.
    """
    groups = _by_signer(queries)
    names = list(groups)
    if n_donors < 1 or n_donors > len(names) - 1:
        raise ConfigError(f"need 1 <= donors <= {len(names) - 1} with {len(names)} participants")
    ks = sorted(set(int(k) for k in ks))
    pooled = {k: np.zeros(n_donors + 1) for k in ks}
    sizes = np.zeros(n_donors + 1, dtype=np.int64)
    total = 0
    for i, name in enumerate(names):
        others = [n for n in names if n != name]
        rng = np.random.default_rng([seed, 6, i])
        picked = [others[j] for j in sorted(rng.choice(len(others), n_donors, replace=False))]
        donors = [s for n in picked for s in groups[n]]
        curve = incremental_instance_eval(groups[name], base_index, donors, backend, ks, seed)
        weight = len(groups[name])
        for k in ks:
            pooled[k] += weight * np.array(curve.curves[k])
        sizes = np.maximum(sizes, curve.lexicon_sizes)
        total += weight
    curves = {k: [float(v) for v in pooled[k] / total] for k in ks}
    return InstanceCurve(backend.name, base_index.joint_set.value, curves, sizes.tolist(), seed)
