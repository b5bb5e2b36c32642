"""Associative long-term memory, short-term memory, novelty gating and the
cue editor."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import AbstractSet, Iterable

CueSet = frozenset


class CapacityExhausted(RuntimeError):
    pass


class SnapshotError(ValueError):
    pass


@dataclass(frozen=True)
class AttributeVector:
    """K attribute bits; ``bits[i]`` is attribute i."""

    bits: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    @classmethod
    def from_str(cls, s: str) -> AttributeVector:
        if any(c not in "01" for c in s):
            raise ValueError(f"non-binary attribute string {s!r}")
        return cls(tuple(c == "1" for c in s))

    @classmethod
    def from_indices(cls, k: int, on: Iterable[int]) -> AttributeVector:
        on = set(on)
        if any(not 0 <= i < k for i in on):
            raise ValueError(f"attribute index out of range for K={k}: {sorted(on)}")
        return cls(tuple(i in on for i in range(k)))

    @classmethod
    def zeros(cls, k: int) -> AttributeVector:
        return cls((False,) * k)

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i: int) -> bool:
        return self.bits[i]

    def ones(self) -> frozenset[int]:
        return frozenset(i for i, b in enumerate(self.bits) if b)

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


@dataclass(frozen=True)
class ImageRecord:
    id: int
    bits: AttributeVector
    memorized_at: int = 0


@dataclass
class LTMStore:
    k: int
    capacity: int
    records: list[ImageRecord] = field(default_factory=list)

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError("capacity must be non-negative")

    def __len__(self) -> int:
        return len(self.records)

    def find(self, bits: AttributeVector) -> ImageRecord | None:
        for r in self.records:
            if r.bits == bits:
                return r
        return None

    def get(self, image_id: int) -> ImageRecord | None:
        for r in self.records:
            if r.id == image_id:
                return r
        return None

    def next_id(self) -> int:
        return max((r.id for r in self.records), default=-1) + 1


@dataclass(frozen=True)
class SearchResult:
    """HIT (``records`` non-empty) or NO_HIT."""

    records: tuple[ImageRecord, ...] = ()

    @property
    def hit(self) -> bool:
        return bool(self.records)

    def ids(self) -> list[int]:
        return [r.id for r in self.records]


NO_HIT = SearchResult()


def search(store: LTMStore, cues: AbstractSet[int]) -> SearchResult:
    """Conjunctive match: every cue attribute must be TRUE in the record."""
    hits = [r for r in store.records if all(r.bits[i] for i in cues)]
    hits.sort(key=lambda r: r.id)
    return SearchResult(tuple(hits))


def derive_cues(bits: AttributeVector, major_mask: AbstractSet[int]) -> CueSet:
    for i in major_mask:
        if not 0 <= i < len(bits):
            raise ValueError(f"mask index {i} outside K={len(bits)}")
    return CueSet(i for i in major_mask if bits[i])


@dataclass(frozen=True)
class NoveltyState:
    repeat_threshold: int = 3
    significance_mask: frozenset[int] = frozenset()
    last: AttributeVector | None = None
    repeats: int = 0

    def __post_init__(self):
        if self.repeat_threshold < 1:
            raise ValueError("repeat threshold must be >= 1")
        object.__setattr__(self, "significance_mask", frozenset(self.significance_mask))


def novelty_gate(
    state: NoveltyState, sensory: AttributeVector, key_search: SearchResult
) -> tuple[bool, NoveltyState]:
    """Gate 4: enable memorization of a significant event with NO HIT.

    Significant means a significance-mask attribute is TRUE, or the same
    vector has now arrived ``repeat_threshold`` times in a row.
    """
    repeats = state.repeats + 1 if sensory == state.last else 1
    significant = any(sensory[i] for i in state.significance_mask) or repeats >= state.repeat_threshold
    enable = significant and not key_search.hit
    return enable, replace(state, last=sensory, repeats=repeats)


def memorize(store: LTMStore, image: AttributeVector, t: int = 0) -> ImageRecord | None:
    """Append ``image``; returns the new record, or None if already stored.

    Raises CapacityExhausted when the store is full.
    """
    if len(image) != store.k:
        raise ValueError(f"image width {len(image)} != K={store.k}")
    if store.find(image) is not None:
        return None
    if len(store.records) >= store.capacity:
        raise CapacityExhausted(f"LTM full ({store.capacity} records)")
    rec = ImageRecord(store.next_id(), image, t)
    store.records.append(rec)
    return rec


def cue_editor_step(cues: AbstractSet[int], rng: random.Random) -> tuple[CueSet, int] | None:
    """Drop one uniformly chosen cue; None when there is nothing to drop."""
    if not cues:
        return None
    ordered = sorted(cues)
    removed = ordered[rng.randrange(len(ordered))]
    return CueSet(c for c in ordered if c != removed), removed


class Origin(enum.Enum):
    SENSORY = "SENSORY"
    RECALL = "RECALL"


@dataclass
class STMRow:
    bits: AttributeVector
    origin: Origin = Origin.SENSORY

    @classmethod
    def empty(cls, k: int) -> STMRow:
        return cls(AttributeVector.zeros(k))


def stm_load(stm: STMRow, bits: AttributeVector, origin: Origin) -> None:
    if len(bits) != len(stm.bits):
        raise ValueError(f"STM holds {len(stm.bits)} attributes, got {len(bits)}")
    stm.bits, stm.origin = bits, origin


def stm_read(stm: STMRow) -> AttributeVector:
    return stm.bits


# LTM snapshot: "K=<k> M=<m>" then "id\tmemorized_at\tbits" per record.

def dumps_snapshot(store: LTMStore) -> str:
    lines = [f"K={store.k} M={store.capacity}"]
    lines += [f"{r.id}\t{r.memorized_at}\t{r.bits}" for r in store.records]
    return "\n".join(lines) + "\n"


def loads_snapshot(text: str) -> LTMStore:
    lines = text.splitlines()
    if not lines:
        raise SnapshotError("empty snapshot")
    try:
        head = dict(part.split("=", 1) for part in lines[0].split())
        k, m = int(head["K"]), int(head["M"])
    except (KeyError, ValueError):
        raise SnapshotError(f"line 1: bad header {lines[0]!r}") from None
    store = LTMStore(k, m)
    seen: set[int] = set()
    for lineno, line in enumerate(lines[1:], 2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise SnapshotError(f"line {lineno}: expected 3 tab-separated fields")
        try:
            rid, t = int(parts[0]), int(parts[1])
            bits = AttributeVector.from_str(parts[2])
        except ValueError as exc:
            raise SnapshotError(f"line {lineno}: {exc}") from None
        if len(bits) != k:
            raise SnapshotError(f"line {lineno}: width {len(bits)} != K={k}")
        if rid in seen or store.find(bits) is not None:
            raise SnapshotError(f"line {lineno}: duplicate record")
        seen.add(rid)
        store.records.append(ImageRecord(rid, bits, t))
    if len(store.records) > m:
        raise SnapshotError(f"{len(store.records)} records exceed M={m}")
    return store


def save_snapshot(store: LTMStore, path: str | Path) -> None:
    Path(path).write_text(dumps_snapshot(store))


def load_snapshot(path: str | Path) -> LTMStore:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SnapshotError(str(exc)) from None
    return loads_snapshot(text)
