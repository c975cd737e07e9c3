"""Upper bound on the tolerable poison budget.

The smallest set of training samples whose influence scopes cover more than
half the classifiers hands the attacker a guaranteed majority on every test
sample; the collective certificate collapses to 0 at that modification
budget. Finding it is a minimum-cover search (exact branch-and-bound on small
instances, greedy otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import InstanceTooLargeError
from .hash_bagging import Membership

UNCOVERABLE = float("inf")  # no sample set reaches a classifier majority

Count = Union[int, float]  # int, or UNCOVERABLE


@dataclass(frozen=True)
class BudgetBound:
    """Minimum (or greedily achieved) number of samples controlling a majority."""

    r_bar: Optional[Count]  # exact minimum, when computed
    r_bar_upper: Optional[Count]  # size of a feasible (not necessarily minimum) cover
    witness: tuple[int, ...]  # training sample indices achieving the reported value

    def __post_init__(self) -> None:
        if (
            self.r_bar is not None
            and self.r_bar_upper is not None
            and self.r_bar > self.r_bar_upper
        ):
            raise ValueError("exact bound exceeds the feasible cover size")


def _distinct_patterns(membership: Membership) -> list[tuple[int, int]]:
    """(cover bitmask, representative sample index) per distinct nonempty scope."""
    seen: dict[tuple[int, ...], int] = {}
    for i, s in enumerate(membership.sets):
        if s and s not in seen:
            seen[s] = i
    out = []
    for s, rep in seen.items():
        mask = 0
        for g in s:
            mask |= 1 << g
        out.append((mask, rep))
    return out


def tolerable_budget_exact(membership: Membership, max_patterns: int = 30) -> BudgetBound:
    """Exact minimum number of samples whose scopes cover more than half of G.

    Branch-and-bound over deduplicated influence patterns, strict subsets
    pruned (a superset covers at least as much at the same cost). Raises
    InstanceTooLargeError beyond ``max_patterns`` distinct patterns; use the
    greedy variant there.
    """
    g = membership.num_classifiers
    target = g // 2 + 1  # strictly more than half
    patterns = _distinct_patterns(membership)
    if len(patterns) > max_patterns:
        raise InstanceTooLargeError(
            f"{len(patterns)} distinct patterns exceed the exact-search cap "
            f"{max_patterns}; use tolerable_budget_greedy"
        )
    # drop strict subsets
    patterns = [
        (mask, rep)
        for mask, rep in patterns
        if not any(
            mask != other and mask & other == mask for other, _ in patterns
        )
    ]
    full = 0
    for mask, _ in patterns:
        full |= mask
    if full.bit_count() < target:
        return BudgetBound(r_bar=UNCOVERABLE, r_bar_upper=UNCOVERABLE, witness=())

    patterns.sort(key=lambda p: (-p[0].bit_count(), p[1]))
    greedy = tolerable_budget_greedy(membership)
    best_count = greedy.r_bar_upper
    best_witness = list(greedy.witness)

    suffix_union = [0] * (len(patterns) + 1)
    for i in range(len(patterns) - 1, -1, -1):
        suffix_union[i] = suffix_union[i + 1] | patterns[i][0]

    def explore(idx: int, covered: int, chosen: list[int]) -> None:
        nonlocal best_count, best_witness
        if covered.bit_count() >= target:
            if len(chosen) < best_count:
                best_count = len(chosen)
                best_witness = sorted(chosen)
            return
        if idx == len(patterns):
            return
        if (covered | suffix_union[idx]).bit_count() < target:
            return  # even taking everything left cannot reach a majority
        missing = target - covered.bit_count()
        largest = patterns[idx][0].bit_count()
        if len(chosen) + -(-missing // largest) >= best_count:
            return  # cannot beat the incumbent cover
        mask, rep = patterns[idx]
        if mask & ~covered:
            chosen.append(rep)
            explore(idx + 1, covered | mask, chosen)
            chosen.pop()
        explore(idx + 1, covered, chosen)

    explore(0, 0, [])
    return BudgetBound(r_bar=best_count, r_bar_upper=best_count, witness=tuple(best_witness))


def tolerable_budget_greedy(membership: Membership) -> BudgetBound:
    """Feasible cover by repeatedly taking the scope with the most new classifiers.

    Returns the cover size as an upper bound on the exact minimum, or the
    UNCOVERABLE marker when even all samples together reach at most half of G.
    """
    g = membership.num_classifiers
    target = g // 2 + 1
    patterns = _distinct_patterns(membership)
    covered = 0
    chosen: list[int] = []
    while covered.bit_count() < target:
        best_gain, best = 0, None
        for mask, rep in patterns:  # first-seen order, so ties keep the smallest index
            gain = (mask & ~covered).bit_count()
            if gain > best_gain:
                best_gain, best = gain, (mask, rep)
        if best is None:
            return BudgetBound(r_bar=None, r_bar_upper=UNCOVERABLE, witness=())
        covered |= best[0]
        chosen.append(best[1])
    return BudgetBound(r_bar=None, r_bar_upper=len(chosen), witness=tuple(sorted(chosen)))
