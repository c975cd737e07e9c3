"""Deterministic hash-based subsampling with bounded influence scope.

The trainset is split by a keyed hash instead of a seeded RNG: classifier g
lives in trainset-hash pair h = g // g_hat at slot g % g_hat, and training
sample i joins sub-trainset g iff hashing its raw payload with key h lands on
slot g % g_hat. Each sample therefore sits in at most one sub-trainset per
pair, so touching one sample can only disturb a bounded number of classifiers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def canonical_hash(payload: bytes, pair_index: int) -> int:
    """Keyed 64-bit hash of a raw sample payload.

    The pair index is prepended as 8 little-endian bytes so each trainset-hash
    pair sees an independent keyed hash of the same payload.
    """
    return fnv1a64(pair_index.to_bytes(8, "little") + payload)


@dataclass(frozen=True)
class SampleRecord:
    """One training sample as ingested: position and raw bytes.

    The payload is hashed exactly as stored; no re-serialization happens.
    """

    index: int
    payload: bytes


@dataclass(frozen=True)
class PairStructure:
    """Layout of G classifiers into trainset-hash pairs of g_hat slots each.

    The last pair is truncated when g_hat does not divide G.
    """

    g_hat: int
    num_pairs: int
    pair_of_classifier: tuple[int, ...]
    slot_of_classifier: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.g_hat < 1:
            raise ValueError("g_hat must be >= 1 (requires K <= N)")
        g = len(self.pair_of_classifier)
        if len(self.slot_of_classifier) != g:
            raise ValueError("pair/slot length mismatch")
        if self.num_pairs != (0 if g == 0 else -(-g // self.g_hat)):
            raise ValueError("num_pairs inconsistent with g_hat and G")
        for i in range(g):
            if self.pair_of_classifier[i] * self.g_hat + self.slot_of_classifier[i] != i:
                raise ValueError(f"classifier {i}: pair*g_hat + slot != index")

    @classmethod
    def for_counts(cls, num_classifiers: int, g_hat: int) -> "PairStructure":
        if g_hat < 1:
            raise ValueError("g_hat must be >= 1")
        pairs = tuple(g // g_hat for g in range(num_classifiers))
        slots = tuple(g % g_hat for g in range(num_classifiers))
        num_pairs = 0 if num_classifiers == 0 else -(-num_classifiers // g_hat)
        return cls(
            g_hat=g_hat,
            num_pairs=num_pairs,
            pair_of_classifier=pairs,
            slot_of_classifier=slots,
        )

    @classmethod
    def single_pair(cls, num_classifiers: int) -> "PairStructure":
        """All classifiers in one pair (g_hat == G)."""
        return cls.for_counts(num_classifiers, max(num_classifiers, 1))

    @property
    def num_classifiers(self) -> int:
        return len(self.pair_of_classifier)

    def pair_ranges(self) -> tuple[tuple[int, int], ...]:
        """Half-open classifier index ranges, one per pair, last one truncated."""
        g = self.num_classifiers
        return tuple(
            (h * self.g_hat, min((h + 1) * self.g_hat, g)) for h in range(self.num_pairs)
        )


@dataclass(frozen=True)
class Membership:
    """Which sub-trainsets each training sample belongs to (the sets S_i)."""

    sets: tuple[tuple[int, ...], ...]
    num_classifiers: int
    pair_structure: Optional[PairStructure] = None

    def __post_init__(self) -> None:
        for i, s in enumerate(self.sets):
            if list(s) != sorted(set(s)):
                raise ValueError(f"S_{i} must be sorted and duplicate-free")
            if any(g < 0 or g >= self.num_classifiers for g in s):
                raise ValueError(f"S_{i} has a classifier outside [0, G)")
            if self.pair_structure is not None:
                pairs = [self.pair_structure.pair_of_classifier[g] for g in s]
                if len(pairs) != len(set(pairs)):
                    raise ValueError(f"S_{i} holds two classifiers of one pair")

    @property
    def num_samples(self) -> int:
        return len(self.sets)

    def to_json_dict(self) -> dict:
        ps = self.pair_structure
        return {
            "G": self.num_classifiers,
            "g_hat": None if ps is None else ps.g_hat,
            "num_pairs": None if ps is None else ps.num_pairs,
            "sets": [list(s) for s in self.sets],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Membership":
        g = int(obj["G"])
        g_hat = obj.get("g_hat")
        ps = None if g_hat is None else PairStructure.for_counts(g, int(g_hat))
        if ps is not None and obj.get("num_pairs") not in (None, ps.num_pairs):
            raise ValueError("num_pairs inconsistent with G and g_hat")
        return cls(
            sets=tuple(tuple(int(x) for x in s) for s in obj["sets"]),
            num_classifiers=g,
            pair_structure=ps,
        )

    @classmethod
    def from_json(cls, text: str) -> "Membership":
        return cls.from_json_dict(json.loads(text))


def subsample(records: Sequence[SampleRecord], num_classifiers: int, subsample_size: int) -> Membership:
    """Assign samples to sub-trainsets by keyed hashing.

    With N samples and target sub-trainset size K, each pair splits the
    trainset into g_hat = N // K disjoint buckets; sample i joins classifier
    g = pair*g_hat + slot iff its keyed hash for that pair lands on slot.
    Purely deterministic in (records, G, K).
    """
    n = len(records)
    if n < 1:
        raise ValueError("need at least one record (K > N otherwise)")
    if num_classifiers < 1:
        raise ValueError("need at least one classifier")
    if subsample_size < 1 or subsample_size > n:
        raise ValueError(f"subsample size must be in [1, {n}], got {subsample_size}")
    g_hat = n // subsample_size
    ps = PairStructure.for_counts(num_classifiers, g_hat)
    sets = []
    for rec in records:
        mine = []
        for h in range(ps.num_pairs):
            slot = canonical_hash(rec.payload, h) % g_hat
            g = h * g_hat + slot
            if g < num_classifiers:  # last pair may be truncated
                mine.append(g)
        sets.append(tuple(mine))
    return Membership(sets=tuple(sets), num_classifiers=num_classifiers, pair_structure=ps)


def records_from_lines(raw: bytes) -> list[SampleRecord]:
    """One record per line; payload is the line's exact bytes without the newline."""
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    return [SampleRecord(index=i, payload=line) for i, line in enumerate(lines)]


def influenced_classifiers(membership: Membership, modified: Iterable[int]) -> frozenset[int]:
    """Union of the influence scopes S_i over the modified training samples."""
    out: set[int] = set()
    for i in modified:
        out.update(membership.sets[i])
    return frozenset(out)
