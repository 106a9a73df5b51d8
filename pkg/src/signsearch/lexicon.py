"""Immutable lexicon index of normalized signs and its text file format.

File layout, one record per line, tab separated::

    SIGNIDX  <format_version>  <joint_set>  <target_length>  <entry_count>
    <gloss>  <signer>  <instance>  <handedness>  <T*J*2 coordinates>

Coordinates are stored as float32 and written with 9 significant digits,
which round-trips float32 exactly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyLexiconError, FormatError, JointSetMismatchError, VersionError
from .joints import Handedness, JointSet, NormalizedSign

MAGIC = "SIGNIDX"
FORMAT_VERSION = 1
STORAGE_DTYPE = np.float32


@dataclass(frozen=True, eq=False)
class LexiconEntry:
    gloss: str
    signer: str
    instance: int
    sign: NormalizedSign

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.gloss, self.signer, self.instance)

    def __eq__(self, other):
        if not isinstance(other, LexiconEntry):
            return NotImplemented
        return self.key == other.key and self.sign == other.sign


def _stored(sign: NormalizedSign, gloss: str, signer: str) -> NormalizedSign:
    frames = np.array(sign.frames, dtype=STORAGE_DTYPE)
    frames.setflags(write=False)
    return NormalizedSign(frames, sign.joint_set, sign.handedness, gloss, signer)


@dataclass(frozen=True, eq=False)
class LexiconIndex:
    """A frozen, ordered collection of signs sharing one joint set and length.

    Adding signs returns a new index; existing snapshots never change.
    """

    entries: tuple[LexiconEntry, ...]
    joint_set: JointSet
    target_length: int
    format_version: int = FORMAT_VERSION

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        if not isinstance(other, LexiconIndex):
            return NotImplemented
        return (
            self.joint_set is other.joint_set
            and self.target_length == other.target_length
            and self.format_version == other.format_version
            and self.entries == other.entries
        )

    def stack(self) -> np.ndarray:
        """All entries as a float64 ``(n, T, J, 2)`` array."""
        return np.stack([e.sign.frames for e in self.entries]).astype(np.float64)

    def signers(self) -> list[str]:
        return list(dict.fromkeys(e.signer for e in self.entries))


Item = tuple[str, str, NormalizedSign]


def _append(
    existing: Sequence[LexiconEntry], items: Iterable[Item], js: JointSet, length: int
) -> tuple[LexiconEntry, ...]:
    counts: dict[tuple[str, str], int] = {}
    for e in existing:
        counts[(e.gloss, e.signer)] = max(counts.get((e.gloss, e.signer), 0), e.instance)
    out = list(existing)
    for gloss, signer, sign in items:
        if sign.joint_set is not js:
            raise JointSetMismatchError(
                f"{gloss!r} by {signer!r} uses {sign.joint_set.value}, index uses {js.value}"
            )
        if sign.length != length:
            raise JointSetMismatchError(f"{gloss!r}: length {sign.length} != {length}")
        for text in (gloss, signer):
            if not text or any(ch in text for ch in "\t\r\n"):
                raise ValueError(f"gloss and signer must be nonempty single-line text, got {text!r}")
        n = counts.get((gloss, signer), 0) + 1
        counts[(gloss, signer)] = n
        out.append(LexiconEntry(gloss, signer, n, _stored(sign, gloss, signer)))
    return tuple(out)


def build_index(signs: Sequence[Item], js: JointSet | None = None) -> LexiconIndex:
    """Build an index from ``(gloss, signer, sign)`` triples in input order."""
    signs = list(signs)
    if not signs:
        raise EmptyLexiconError("cannot build an index from no signs")
    if js is None:
        js = signs[0][2].joint_set
    length = signs[0][2].length
    return LexiconIndex(_append((), signs, js, length), js, length)


def add_instances(index: LexiconIndex, signs: Sequence[Item]) -> LexiconIndex:
    """Return a new index with ``signs`` appended; ``index`` is left untouched."""
    entries = _append(index.entries, signs, index.joint_set, index.target_length)
    return LexiconIndex(entries, index.joint_set, index.target_length, index.format_version)


def from_signs(signs: Sequence[NormalizedSign], js: JointSet | None = None) -> LexiconIndex:
    """Convenience wrapper taking gloss and signer from each sign."""
    return build_index([(s.gloss, s.signer, s) for s in signs], js)


def glosses(index: LexiconIndex) -> list[str]:
    return list(dict.fromkeys(e.gloss for e in index.entries))


def save_index(index: LexiconIndex, path: str | os.PathLike) -> None:
    lines = [
        "\t".join(
            [MAGIC, str(index.format_version), index.joint_set.value,
             str(index.target_length), str(len(index))]
        )
    ]
    for e in index.entries:
        coords = " ".join(f"{v:.9g}" for v in e.sign.frames.ravel().tolist())
        lines.append("\t".join([e.gloss, e.signer, str(e.instance), e.sign.handedness.value, coords]))
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def load_index(path: str | os.PathLike) -> LexiconIndex:
    """Read an index file.

    Raises
    ------
    VersionError
        The file declares a format version this code does not read.
    FormatError
        The file is truncated or otherwise malformed.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not UTF-8 text") from exc
    lines = text.split("\n")
    header = lines[0].split("\t")
    if len(header) != 5 or header[0] != MAGIC:
        raise FormatError(f"{path}: not a sign index file")
    try:
        version = int(header[1])
    except ValueError as exc:
        raise FormatError(f"{path}: bad version field") from exc
    if version != FORMAT_VERSION:
        raise VersionError(f"{path}: format version {version} (supported: {FORMAT_VERSION})")
    try:
        js = JointSet.parse(header[2])
        length = int(header[3])
        count = int(header[4])
    except ValueError as exc:
        raise FormatError(f"{path}: bad header: {exc}") from exc
    if not text.endswith("\n") or len(lines) != count + 2 or lines[-1] != "":
        raise FormatError(f"{path}: expected {count} entries, file is truncated or padded")

    n_values = length * js.joint_count * 2
    entries = []
    for lineno, line in enumerate(lines[1:-1], start=2):
        fields = line.split("\t")
        if len(fields) != 5:
            raise FormatError(f"{path}:{lineno}: expected 5 fields, got {len(fields)}")
        gloss, signer, instance, hand, coords = fields
        try:
            values = np.array(coords.split(" "), dtype=STORAGE_DTYPE)
            inst = int(instance)
            handedness = Handedness(hand)
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        if values.size != n_values or not np.all(np.isfinite(values)):
            raise FormatError(f"{path}:{lineno}: expected {n_values} finite coordinates")
        frames = values.reshape(length, js.joint_count, 2)
        frames.setflags(write=False)
        entries.append(
            LexiconEntry(gloss, signer, inst, NormalizedSign(frames, js, handedness, gloss, signer))
        )
    keys = [e.key for e in entries]
    if len(set(keys)) != len(keys):
        raise FormatError(f"{path}: duplicate (gloss, signer, instance) entries")
    return LexiconIndex(tuple(entries), js, length, version)


def write_signs(signs: Sequence[NormalizedSign], path: str | os.PathLike) -> None:
    """Write standalone sign records (an index holding just these signs)."""
    save_index(from_signs(signs), path)


def read_signs(path: str | os.PathLike) -> list[NormalizedSign]:
    return [e.sign for e in load_index(path).entries]
