"""Brute-force ground truth for small attack instances.

Deliberately independent of the swing/deficit arithmetic used everywhere
else: an attack is simulated by literally re-tallying the vote counts with
all controlled votes handed to one rival class and re-running a local
smallest-index argmax. Concentrating the controlled votes on a single rival
dominates any split (that rival's count is maximal and every other class's
count is minimal), so trying each rival in turn is exhaustive.
"""

from __future__ import annotations

from itertools import combinations
from typing import Optional, Sequence

from .core import Budget, InstanceTooLargeError, VoteMatrix
from .hash_bagging import Membership, PairStructure

MAX_BRUTE_CLASSIFIERS = 20
MAX_BRUTE_PATTERNS = 20


def _argmax_smallest(counts: Sequence[int]) -> int:
    best = 0
    for y in range(1, len(counts)):
        if counts[y] > counts[best]:
            best = y
    return best


def _row_flips(
    votes_row: Sequence[int],
    counts_row: Sequence[int],
    pred: int,
    controlled: Sequence[int],
    num_classes: int,
) -> bool:
    for y in range(num_classes):
        if y == pred:
            continue
        counts = list(counts_row)
        for g in controlled:
            counts[votes_row[g]] -= 1
        counts[y] += len(controlled)
        if _argmax_smallest(counts) != pred:
            return True
    return False


def _count_flipped(votes: VoteMatrix, controlled: Sequence[int]) -> int:
    return sum(
        1
        for j in range(votes.num_samples)
        if _row_flips(
            votes.votes[j],
            votes.counts[j],
            votes.predictions[j],
            controlled,
            votes.num_classes,
        )
    )


def brute_force_p2(
    votes: VoteMatrix,
    pair_structure: PairStructure,
    budget: Budget,
    return_witness: bool = False,
):
    """Exact maximum of simultaneously flipped rows over all per-pair-capped
    controlled-classifier sets; enumerates every subset of [0, G).

    Ascending-bitmask enumeration with strict-improvement updates makes the
    witness the lexicographically first optimum.
    """
    g = votes.num_classifiers
    if pair_structure.num_classifiers != g:
        raise ValueError("pair structure does not match the vote matrix")
    if g > MAX_BRUTE_CLASSIFIERS:
        raise InstanceTooLargeError(
            f"G={g} exceeds the brute-force cap {MAX_BRUTE_CLASSIFIERS}"
        )
    cap = budget.per_pair_cap()
    pair_masks = []
    for start, end in pair_structure.pair_ranges():
        mask = 0
        for i in range(start, end):
            mask |= 1 << i
        pair_masks.append(mask)
    best, best_witness = 0, ()
    for mask in range(1 << g):
        if any((mask & pm).bit_count() > cap for pm in pair_masks):
            continue
        controlled = [i for i in range(g) if mask >> i & 1]
        flipped = _count_flipped(votes, controlled)
        if flipped > best:
            best, best_witness = flipped, tuple(controlled)
    if return_witness:
        return best, best_witness
    return best


def brute_force_p1(
    votes: VoteMatrix,
    membership: Membership,
    r_mod: int,
    return_witness: bool = False,
):
    """Exact maximum of flipped rows over all choices of at most r_mod
    distinct influence patterns (the controlled set is their union).

    The witness lists one representative training sample per chosen pattern.
    """
    if membership.num_classifiers != votes.num_classifiers:
        raise ValueError("membership does not match the vote matrix")
    if r_mod < 0:
        raise ValueError("r_mod must be >= 0")
    seen: dict[tuple[int, ...], int] = {}
    for i, s in enumerate(membership.sets):
        if s not in seen:
            seen[s] = i
    patterns = list(seen.items())  # (classifier tuple, representative index)
    if len(patterns) > MAX_BRUTE_PATTERNS:
        raise InstanceTooLargeError(
            f"{len(patterns)} distinct patterns exceed the brute-force cap "
            f"{MAX_BRUTE_PATTERNS}"
        )
    best, best_witness = 0, ()
    for size in range(min(r_mod, len(patterns)) + 1):
        for combo in combinations(range(len(patterns)), size):
            controlled = sorted({g for k in combo for g in patterns[k][0]})
            flipped = _count_flipped(votes, controlled)
            if flipped > best:
                best = flipped
                best_witness = tuple(patterns[k][1] for k in combo)
    if return_witness:
        return best, best_witness
    return best


def single_row_breakable(
    votes_row: Sequence[int],
    counts_row: Sequence[int],
    pred: int,
    num_classes: int,
    max_controlled: Optional[int] = None,
) -> int:
    """Minimum controlled-set size flipping one row, by exhaustive subsets.

    Returns len(votes_row) + 1 when no subset up to ``max_controlled``
    (default: all classifiers) flips it.
    """
    g = len(votes_row)
    limit = g if max_controlled is None else min(max_controlled, g)
    for size in range(limit + 1):
        for combo in combinations(range(g), size):
            if _row_flips(votes_row, counts_row, pred, combo, num_classes):
                return size
    return g + 1
