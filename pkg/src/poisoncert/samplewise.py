"""Per-prediction certificates and the breakable-set filter.

A prediction row is characterized by its margin (votes the winner has to
spare under the tie rule) and by the minimum number of fully-controlled
classifiers an attacker needs to flip it. The filter keeps only rows whose
margin could possibly be closed by the budget; everything else is provably
safe and can be dropped before any optimization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Budget, VoteMatrix, rival_deficit
from .hash_bagging import PairStructure


@dataclass(frozen=True)
class SampleCertificate:
    """Exact per-row robustness facts for one test sample."""

    margin: int
    min_controlled_to_break: int
    breakable_at_cap: bool

    def __post_init__(self) -> None:
        if self.min_controlled_to_break < 0:
            raise ValueError("negative classifier count")


def row_margin(counts_row: Sequence[int], pred: int) -> int:
    """Votes the winner has to spare: min rival deficit minus one.

    A row with no rival class (C == 1) gets G + 1, larger than any closable
    margin.
    """
    deficits = [
        rival_deficit(counts_row, pred, y) for y in range(len(counts_row)) if y != pred
    ]
    if not deficits:
        return sum(counts_row) + 1
    return min(deficits) - 1


def min_controlled_to_break(
    counts_row: Sequence[int],
    pred: int,
    votes_row: Optional[Sequence[int]] = None,
) -> int:
    """Minimum number of fully-controlled classifiers that flips the row.

    Greedy per rival: a controlled pred-voter closes 2 of the deficit, a
    controlled third-class voter closes 1, controlling a rival voter gains
    nothing. Returns G + 1 when no rival is reachable even controlling all G.
    """
    total = sum(counts_row)
    if votes_row is not None and len(votes_row) != total:
        raise ValueError("votes row does not match counts row")
    best = total + 1
    for y in range(len(counts_row)):
        if y == pred:
            continue
        d = rival_deficit(counts_row, pred, y)
        if d <= 0:
            return 0
        n2 = counts_row[pred]
        n1 = total - counts_row[pred] - counts_row[y]
        if 2 * n2 >= d:
            t = (d + 1) // 2
        elif 2 * n2 + n1 >= d:
            t = n2 + (d - 2 * n2)
        else:
            continue  # unreachable rival
        best = min(best, t)
    return best


def breakable_under_pair_caps(
    votes_row: Sequence[int],
    counts_row: Sequence[int],
    pred: int,
    pair_ranges: Sequence[tuple[int, int]],
    cap: int,
) -> bool:
    """Exact single-row feasibility: can some per-pair-capped attack flip it?

    For a fixed rival the objective is a sum of independent per-classifier
    swings, so taking the top min(cap, pair size) swings inside each pair is
    optimal.
    """
    if cap <= 0:
        return False
    num_classes = len(counts_row)
    for y in range(num_classes):
        if y == pred:
            continue
        d = rival_deficit(counts_row, pred, y)
        if d <= 0:
            return True
        total = 0
        for start, end in pair_ranges:
            k = min(cap, end - start)
            n2 = sum(1 for g in range(start, end) if votes_row[g] == pred)
            n1 = (end - start) - n2 - sum(1 for g in range(start, end) if votes_row[g] == y)
            take2 = min(k, n2)
            take1 = min(k - take2, n1)
            total += 2 * take2 + take1
            if total >= d:
                break
        if total >= d:
            return True
    return False


def sample_certificates(
    votes: VoteMatrix, pair_structure: PairStructure, budget: Budget
) -> tuple[SampleCertificate, ...]:
    """Margin, exact break cost, and budget feasibility for every row."""
    ranges = pair_structure.pair_ranges()
    cap = budget.per_pair_cap()
    out = []
    for j in range(votes.num_samples):
        counts = votes.counts[j]
        pred = votes.predictions[j]
        out.append(
            SampleCertificate(
                margin=row_margin(counts, pred),
                min_controlled_to_break=min_controlled_to_break(counts, pred, votes.votes[j]),
                breakable_at_cap=breakable_under_pair_caps(
                    votes.votes[j], counts, pred, ranges, cap
                ),
            )
        )
    return tuple(out)


def omega(
    votes: VoteMatrix, pair_structure: PairStructure, budget: Budget
) -> tuple[int, ...]:
    """Rows whose margin the budget could possibly close.

    The attacker controls at most cap classifiers in each of the pairs, and a
    controlled classifier moves any margin by at most 2, so every breakable
    row satisfies margin <= 2 * num_pairs * cap. The returned superset is what
    the optimization has to look at; the rest is certified in O(1).
    """
    threshold = 2 * pair_structure.num_pairs * budget.per_pair_cap()
    return tuple(
        j
        for j in range(votes.num_samples)
        if row_margin(votes.counts[j], votes.predictions[j]) <= threshold
    )


def samplewise_collective_count(
    votes: VoteMatrix, pair_structure: PairStructure, budget: Budget
) -> int:
    """Sample-wise collective robustness: rows no individually-tailored attack flips.

    Each row is tested exactly (per-pair caps, greedy top swings); the count
    is M minus the breakable rows. Attacks on different rows need not be
    consistent with each other, which is what makes this a lower bound on the
    collective certificate.
    """
    ranges = pair_structure.pair_ranges()
    cap = budget.per_pair_cap()
    broken = sum(
        1
        for j in range(votes.num_samples)
        if breakable_under_pair_caps(
            votes.votes[j], votes.counts[j], votes.predictions[j], ranges, cap
        )
    )
    return votes.num_samples - broken
