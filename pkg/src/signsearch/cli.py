"""Command-line front end: ``signsearch {ingest,index,query,eval}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from . import evaluate as ev
from .distance import DtwParams
from .embedding import UmapParams
from .errors import SignSearchError
from .joints import JointSet, NormalizedSign
from .lexicon import add_instances, build_index, from_signs, glosses, load_index, read_signs, save_index, write_signs
from .pose_io import load_sequence
from .preprocess import PreprocessConfig, normalize_pipeline
from .synth import synth_lexicon, synth_sign

logger = logging.getLogger("signsearch")

SIGN_SUFFIX = ".sign"
JOINT_SET_CHOICES = [js.value for js in JointSet]
BACKEND_CHOICES = [m.value for m in ev.Method]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _str_list(choices):
    def parse(text: str) -> list[str]:
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad or not items:
            raise argparse.ArgumentTypeError(f"choose from {','.join(choices)}")
        return items

    return parse


def _add_preprocess_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--target-length", type=int, default=86)
    p.add_argument("--median-radius", type=int, default=3)
    p.add_argument("--max-missing", type=float, default=0.5)


def _add_backend_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("DTW")
    g.add_argument("--closed-begin", action="store_true", help="anchor the alignment at the reference start")
    g.add_argument("--closed-end", action="store_true", help="anchor the alignment at the reference end")
    g = p.add_argument_group("UMAP")
    g.add_argument("--n-neighbors", type=int, default=15)
    g.add_argument("--min-dist", type=float, default=0.1)
    g.add_argument("--n-epochs", type=int, default=200)
    g.add_argument("--learning-rate", type=float, default=1.0)
    g.add_argument("--negative-samples", type=int, default=5)
    p.add_argument("--expanded", action="store_true", help="rank every instance instead of one row per gloss")


def _backend(args, method: str) -> ev.BackendConfig:
    dtw = DtwParams(open_begin=not args.closed_begin, open_end=not args.closed_end)
    umap = None
    if method == ev.Method.UMAP.value:
        umap = UmapParams(
            seed=args.seed, n_neighbors=args.n_neighbors, min_dist=args.min_dist,
            n_epochs=args.n_epochs, learning_rate=args.learning_rate,
            negative_samples=args.negative_samples,
        )
    return ev.BackendConfig(method, dtw, umap, collapsed=not args.expanded)


def _preprocess_config(args) -> PreprocessConfig:
    return PreprocessConfig(args.target_length, args.median_radius, args.max_missing)


def _frame_files(directory: Path) -> list[Path]:
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix == ".json")


def _split_name(name: str) -> tuple[str, str]:
    gloss, sep, signer = name.rpartition("__")
    if not sep or not gloss or not signer:
        raise ValueError(f"directory name {name!r} is not of the form gloss__signer")
    return gloss, signer


def ingest_dir(directory: Path, js: JointSet, cfg: PreprocessConfig) -> NormalizedSign:
    gloss, signer = _split_name(directory.name)
    seq = load_sequence(_frame_files(directory), source_id=directory.name)
    return normalize_pipeline(seq, js, cfg, gloss, signer)


def _sign_paths(paths: Sequence[str]) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(q for q in p.iterdir() if q.suffix == SIGN_SUFFIX))
        else:
            out.append(p)
    return out


def _read_all(paths: Sequence[str]) -> list[NormalizedSign]:
    signs = []
    for p in _sign_paths(paths):
        signs.extend(read_signs(p))
    return signs


def _atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def cmd_ingest(args) -> int:
    src, dst = Path(args.input_dir), Path(args.output_dir)
    subdirs = sorted(p for p in src.iterdir() if p.is_dir()) if src.is_dir() else []
    if not subdirs:
        print(f"error: no sign directories under {src}", file=sys.stderr)
        return 1
    js = JointSet.parse(args.joint_set)
    cfg = _preprocess_config(args)
    dst.mkdir(parents=True, exist_ok=True)
    n_ok = 0
    for d in subdirs:
        try:
            sign = ingest_dir(d, js, cfg)
        except (SignSearchError, ValueError, OSError) as exc:
            print(f"error\t{d.name}\t{type(exc).__name__}: {exc}")
            continue
        write_signs([sign], dst / f"{d.name}{SIGN_SUFFIX}")
        print(f"ok\t{d.name}\t{sign.handedness.value}")
        n_ok += 1
    if n_ok == 0:
        print("error: every sign failed to ingest", file=sys.stderr)
        return 1
    if n_ok < len(subdirs):
        print(f"warning: {len(subdirs) - n_ok} of {len(subdirs)} signs skipped", file=sys.stderr)
    return 0


def cmd_index_build(args) -> int:
    js = JointSet.parse(args.joint_set)
    signs = _read_all(args.signs)
    index = build_index([(s.gloss, s.signer, s) for s in signs], js)
    save_index(index, args.output)
    print(f"wrote {args.output}: {len(index)} entries, joint set {js.value}")
    return 0


def cmd_index_add(args) -> int:
    index = load_index(args.index)
    signs = _read_all(args.signs)
    new = add_instances(index, [(s.gloss, s.signer, s) for s in signs])
    out = args.output or args.index
    save_index(new, out)
    print(f"wrote {out}: {len(index)} -> {len(new)} entries")
    return 0


def cmd_index_info(args) -> int:
    index = load_index(args.index)
    print(f"format_version\t{index.format_version}")
    print(f"joint_set\t{index.joint_set.value}")
    print(f"target_length\t{index.target_length}")
    print(f"entries\t{len(index)}")
    print(f"glosses\t{len(glosses(index))}")
    print(f"signers\t{','.join(index.signers())}")
    return 0


def _load_query(path: Path, index, args) -> NormalizedSign:
    if path.is_dir():
        cfg = PreprocessConfig(index.target_length, args.median_radius, args.max_missing)
        seq = load_sequence(_frame_files(path), source_id=path.name)
        return normalize_pipeline(seq, index.joint_set, cfg, path.name, "query")
    return read_signs(path)[0]


def cmd_query(args) -> int:
    index = load_index(args.index)
    query = _load_query(Path(args.query), index, args)
    ranked = ev.rank(query, index, _backend(args, args.backend))
    print("rank\tgloss\tsigner\tinstance\tdistance")
    for i, item in enumerate(ranked.items[: args.k], start=1):
        print(f"{i}\t{item.gloss}\t{item.signer}\t{item.instance}\t{item.distance:.6f}")
    return 0


def _queries_by_joint_set(signs: Sequence[NormalizedSign]) -> dict[JointSet, list[NormalizedSign]]:
    out: dict[JointSet, list[NormalizedSign]] = {}
    for s in signs:
        out.setdefault(s.joint_set, []).append(s)
    return out


def _instance_csv(curves) -> str:
    return "".join(c.to_csv(header=(i == 0)) for i, c in enumerate(curves))


def cmd_eval(args) -> int:
    backends = [_backend(args, b) for b in args.backends]
    if args.experiment == "synth":
        return _eval_synth(args, backends)
    if not args.index or not args.queries:
        print("error: --index and --queries are required for this experiment", file=sys.stderr)
        return 2
    indices = {}
    for path in args.index:
        idx = load_index(path)
        indices[idx.joint_set] = idx
    queries = _queries_by_joint_set(_read_all(args.queries))
    queries = {js: q for js, q in queries.items() if js in indices}
    if not queries:
        print("error: no query signs match the joint sets of the given indices", file=sys.stderr)
        return 1
    if args.experiment == "table":
        report = ev.run_condition_eval(queries, indices, backends, args.ks, noise=not args.no_noise, seed=args.seed)
        _atomic_write(args.output, report.to_csv())
    else:
        curves = [
            ev.leave_one_out_instance_eval(q, indices[js], args.donors, b, (1, 10), args.seed)
            for js, q in queries.items()
            for b in backends
        ]
        _atomic_write(args.output, _instance_csv(curves))
    print(f"wrote {args.output}")
    return 0


def _eval_synth(args, backends) -> int:
    out = Path(args.output)
    table_rows = ev.EvalReport(seed=args.seed)
    curves = []
    for name in args.joint_sets:
        js = JointSet.parse(name)
        data = synth_lexicon(args.glosses, args.query_signers, args.jitter, args.seed, js)
        index = from_signs(data.lexicon)
        report = ev.run_condition_eval({js: data.queries}, {js: index}, backends, args.ks,
                                       noise=not args.no_noise, seed=args.seed)
        table_rows.rows.extend(report.rows)
        if args.donors > 0:
            donors = [
                synth_sign(g, args.query_signers + d, args.seed, js, args.jitter)
                for d in range(args.donors)
                for g in range(args.glosses)
            ]
            for b in backends:
                curves.append(ev.incremental_instance_eval(data.queries, index, donors, b, (1, 10), args.seed))
    table = table_rows.to_csv()
    instances = _instance_csv(curves) if curves else None
    _atomic_write(out / "table.csv", table)
    if instances is not None:
        _atomic_write(out / "instances.csv", instances)
    print(f"wrote {out / 'table.csv'}" + (f" and {out / 'instances.csv'}" if instances else ""))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signsearch", description="Training-free sign lexicon retrieval.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize per-sign frame directories into sign records")
    p.add_argument("input_dir", help="directory of gloss__signer subdirectories of frame files")
    p.add_argument("output_dir")
    p.add_argument("--joint-set", choices=JOINT_SET_CHOICES, default="arm5")
    _add_preprocess_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="build, extend or inspect a lexicon index")
    isub = p.add_subparsers(dest="index_command", required=True)
    b = isub.add_parser("build")
    b.add_argument("signs", nargs="+", help="sign record files or directories of them")
    b.add_argument("--joint-set", choices=JOINT_SET_CHOICES, required=True)
    b.add_argument("-o", "--output", required=True)
    b.set_defaults(func=cmd_index_build)
    a = isub.add_parser("add")
    a.add_argument("index")
    a.add_argument("signs", nargs="+")
    a.add_argument("-o", "--output", help="defaults to overwriting INDEX")
    a.set_defaults(func=cmd_index_add)
    i = isub.add_parser("info")
    i.add_argument("index")
    i.set_defaults(func=cmd_index_info)

    p = sub.add_parser("query", help="rank the lexicon for one query sign")
    p.add_argument("index")
    p.add_argument("query", help="a sign record file, or a directory of frame files")
    p.add_argument("--backend", choices=BACKEND_CHOICES, default="dtw")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--seed", type=int)
    p.add_argument("--median-radius", type=int, default=3)
    p.add_argument("--max-missing", type=float, default=0.5)
    _add_backend_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="top-k accuracy experiments")
    p.add_argument("--experiment", choices=["table", "instances", "synth"], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--index", action="append", help="lexicon index (repeat for several joint sets)")
    p.add_argument("--queries", nargs="+", help="query sign records or directories of them")
    p.add_argument("--backends", type=_str_list(BACKEND_CHOICES), default=["dtw", "euclidean", "pca", "umap"])
    p.add_argument("--ks", type=_int_list, default=list(ev.DEFAULT_KS))
    p.add_argument("--no-noise", action="store_true", help="do not add another participant's signs to the lexicon")
    p.add_argument("--donors", type=int, default=6)
    p.add_argument("--glosses", type=int, default=50)
    p.add_argument("--query-signers", type=int, default=3)
    p.add_argument("--jitter", type=float, default=0.1)
    p.add_argument("--joint-sets", type=_str_list(JOINT_SET_CHOICES), default=JOINT_SET_CHOICES)
    p.add_argument("-o", "--output", required=True, help="CSV path (table/instances) or directory (synth)")
    _add_backend_flags(p)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "query" and args.backend == "umap" and args.seed is None:
        parser.error("--backend umap requires --seed")
    try:
        return args.func(args)
    except SignSearchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
