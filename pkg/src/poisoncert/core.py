"""Shared domain types and the voting arithmetic of majority-vote bagging.

All tie handling is exact integer arithmetic: a challenger class y beats the
current prediction p iff it ends with strictly more votes, or the same number
of votes and a smaller index. Everything downstream (margins, deficits,
swings) is expressed in these integers, never in fractional vote weights.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence


class CertStatus(enum.Enum):
    """How a certificate's bound was obtained."""

    EXACT = "Exact"
    TIME_LIMIT_BOUND = "TimeLimitBound"
    DECOMPOSED = "Decomposed"


class InstanceTooLargeError(Exception):
    """The instance exceeds an exhaustive-search size cap."""


def ensemble_predict(counts_row: Sequence[int]) -> int:
    """Majority class of a per-class vote-count row; ties go to the smallest index.

    A row of all zeros (no classifiers) predicts class 0.
    """
    if len(counts_row) == 0:
        raise ValueError("class set is empty (C == 0)")
    best = 0
    for y in range(1, len(counts_row)):
        if counts_row[y] > counts_row[best]:
            best = y
    return best


def tally_row(votes_row: Sequence[int], num_classes: int) -> tuple[int, ...]:
    """Per-class vote counts for one test sample."""
    counts = [0] * num_classes
    for v in votes_row:
        if v < 0 or v >= num_classes:
            raise ValueError(f"vote {v} outside [0, {num_classes})")
        counts[v] += 1
    return tuple(counts)


def prediction_changed(counts_after: Sequence[int], original_pred: int) -> bool:
    """Whether attacked counts elect a different class than ``original_pred``.

    True iff some rival y ends strictly ahead, or ties with a smaller index
    (the half-vote tie penalty, done lexicographically in integers).
    """
    p = counts_after[original_pred]
    for y, c in enumerate(counts_after):
        if y == original_pred:
            continue
        if c > p or (c == p and y < original_pred):
            return True
    return False


def rival_deficit(counts_row: Sequence[int], pred: int, rival: int) -> int:
    """Total vote swing needed for ``rival`` to take the prediction.

    A swing of d means the gap counts[pred] - counts[rival] shrank by d (each
    controlled classifier contributes its vote_swing). The prediction flips to
    rival exactly when the accumulated swing reaches this deficit.
    """
    # rival < pred wins ties, so it needs one vote less
    return counts_row[pred] - counts_row[rival] + (0 if rival < pred else 1)


def vote_swing(vote: int, pred: int, rival: int) -> int:
    """Gap reduction from handing one classifier's vote to ``rival``.

    2 if it currently votes pred (pred loses one, rival gains one), 0 if it
    already votes rival, else 1.
    """
    if vote == pred:
        return 2
    if vote == rival:
        return 0
    return 1


def relative_gap(m_sam: int, m_col: int) -> float:
    """Relative over-estimate of the sample-wise attack count vs the collective one.

    Returns (m_sam - m_col) / m_sam, or NaN when m_sam == 0.
    """
    if m_col > m_sam:
        raise ValueError(f"inconsistent certificates: m_col {m_col} > m_sam {m_sam}")
    if m_sam == 0:
        return math.nan
    return (m_sam - m_col) / m_sam


@dataclass(frozen=True)
class Budget:
    """Poison budget: insertions, deletions, and modifications of training samples."""

    r_ins: int = 0
    r_del: int = 0
    r_mod: int = 0

    def __post_init__(self) -> None:
        for name in ("r_ins", "r_del", "r_mod"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def per_pair_cap(self) -> int:
        # a modification counts twice: one sample leaves, one enters
        return self.r_ins + self.r_del + 2 * self.r_mod

    def to_json_dict(self) -> dict:
        return {"r_ins": self.r_ins, "r_del": self.r_del, "r_mod": self.r_mod}


@dataclass(frozen=True)
class VoteMatrix:
    """Hard votes of G sub-classifiers on M test samples over C classes.

    votes[j][g] is the class predicted by classifier g on sample j; counts and
    predictions are the tallied per-row counts and the majority winner.
    """

    num_classifiers: int  # G
    num_samples: int  # M
    num_classes: int  # C
    votes: tuple[tuple[int, ...], ...]
    counts: tuple[tuple[int, ...], ...]
    predictions: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.num_classes < 1:
            raise ValueError("need at least one class (C >= 1)")
        if self.num_classifiers < 0 or self.num_samples < 0:
            raise ValueError("negative dimensions")
        if len(self.votes) != self.num_samples or len(self.counts) != self.num_samples:
            raise ValueError("row count mismatch")
        if len(self.predictions) != self.num_samples:
            raise ValueError("prediction count mismatch")
        for j in range(self.num_samples):
            row = self.votes[j]
            if len(row) != self.num_classifiers:
                raise ValueError(f"row {j}: expected {self.num_classifiers} votes")
            if any(v < 0 or v >= self.num_classes for v in row):
                raise ValueError(f"row {j}: vote outside [0, {self.num_classes})")
            if self.counts[j] != tally_row(row, self.num_classes):
                raise ValueError(f"row {j}: counts do not match votes")
            if self.predictions[j] != ensemble_predict(self.counts[j]):
                raise ValueError(f"row {j}: stored prediction is not the majority class")

    @classmethod
    def from_votes(
        cls, votes: Sequence[Sequence[int]], num_classes: Optional[int] = None
    ) -> "VoteMatrix":
        """Build a consistent matrix from raw votes, tallying counts and predictions."""
        rows = tuple(tuple(int(v) for v in row) for row in votes)
        num_samples = len(rows)
        num_classifiers = len(rows[0]) if rows else 0
        if num_classes is None:
            num_classes = max((v for row in rows for v in row), default=0) + 1
        counts = tuple(tally_row(row, num_classes) for row in rows)
        predictions = tuple(ensemble_predict(c) for c in counts)
        return cls(
            num_classifiers=num_classifiers,
            num_samples=num_samples,
            num_classes=num_classes,
            votes=rows,
            counts=counts,
            predictions=predictions,
        )

    def restrict_rows(self, indices: Sequence[int]) -> "VoteMatrix":
        """Sub-matrix keeping the given sample rows, in the given order."""
        idx = tuple(indices)
        return VoteMatrix(
            num_classifiers=self.num_classifiers,
            num_samples=len(idx),
            num_classes=self.num_classes,
            votes=tuple(self.votes[j] for j in idx),
            counts=tuple(self.counts[j] for j in idx),
            predictions=tuple(self.predictions[j] for j in idx),
        )


@dataclass(frozen=True)
class Certificate:
    """A sound robustness certificate plus the diagnostics behind it.

    collective_robustness_lb is M - attacked_ub (or, when ground-truth labels
    were supplied, correct - attacked_ub); attacked_ub is a sound upper bound
    on the maximum number of simultaneously changed predictions, and
    attacked_incumbent is the best feasible attack actually found.
    """

    collective_robustness_lb: int
    attacked_ub: int
    attacked_incumbent: int
    certified_accuracy: Optional[int]
    status: CertStatus
    solve_seconds: float
    budget: Budget
    omega_size: int  # target rows left after filtering out unbreakable ones

    def __post_init__(self) -> None:
        if self.attacked_incumbent > self.attacked_ub:
            raise ValueError("incumbent exceeds upper bound")
        if self.attacked_incumbent < 0 or self.omega_size < 0:
            raise ValueError("negative counts")
        if self.status is CertStatus.EXACT and self.attacked_incumbent != self.attacked_ub:
            raise ValueError("Exact status requires incumbent == upper bound")

    def to_json_dict(self) -> dict:
        return {
            "collective_robustness_lb": self.collective_robustness_lb,
            "attacked_ub": self.attacked_ub,
            "attacked_incumbent": self.attacked_incumbent,
            "bound_gap": self.attacked_ub - self.attacked_incumbent,
            "certified_accuracy": self.certified_accuracy,
            "status": self.status.value,
            "solve_seconds": self.solve_seconds,
            "budget": self.budget.to_json_dict(),
            "omega_size": self.omega_size,
        }
