"""Attack-optimization problems over binary variables, native and standard form.

Two native flavors share one shape: binary variables that each hand the
attacker a set of classifiers, per-group cardinality caps, and an objective
counting flipped target rows.

* P2: one variable per classifier, one cap per trainset-hash pair (hash
  bagging threat model).
* P1: one variable per distinct influence pattern S_i, a single cap on how
  many patterns (training-sample modifications) may be chosen.

`to_standard_form` re-emits the problem as an explicit 0/1 integer program
with A/Y/Z/W variable blocks and big-M rows. That form deliberately drops the
smallest-index tie rule (a rival that merely ties counts as a flip), which is
the documented gap between the two encodings.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Budget, VoteMatrix
from .hash_bagging import Membership, PairStructure
from .samplewise import omega as omega_rows
from .samplewise import row_margin


class Mode(enum.Enum):
    P1 = "P1"
    P2 = "P2"


@dataclass(frozen=True)
class GroupCap:
    """At most ``cap`` of the listed decision variables may be 1."""

    members: tuple[int, ...]
    cap: int


@dataclass(frozen=True)
class TargetRow:
    """One breakable test sample: original row index plus its vote data."""

    index: int
    votes: tuple[int, ...]
    counts: tuple[int, ...]
    pred: int


@dataclass(frozen=True)
class BilpProblem:
    """Native attack problem: choose variables to flip as many rows as possible."""

    mode: Mode
    decision_dim: int
    pattern_sets: tuple[tuple[int, ...], ...]  # classifiers granted by each variable
    multiplicities: tuple[int, ...]  # how many training samples share the pattern
    pattern_representatives: tuple[int, ...]  # sample index (P1) / classifier (P2)
    group_caps: tuple[GroupCap, ...]
    target_rows: tuple[TargetRow, ...]
    num_classifiers: int
    num_samples: int  # rows of the full vote matrix, not just targets
    num_classes: int

    def __post_init__(self) -> None:
        if len(self.pattern_sets) != self.decision_dim:
            raise ValueError("pattern count != decision_dim")
        if len(self.multiplicities) != self.decision_dim:
            raise ValueError("multiplicity count != decision_dim")
        for s in self.pattern_sets:
            if any(g < 0 or g >= self.num_classifiers for g in s):
                raise ValueError("pattern references a classifier outside [0, G)")
        for grp in self.group_caps:
            if any(v < 0 or v >= self.decision_dim for v in grp.members):
                raise ValueError("group references an unknown variable")
            if grp.cap < 0:
                raise ValueError("negative group cap")

    def r_mod(self) -> int:
        """P1's single budget cap."""
        if self.mode is not Mode.P1:
            raise ValueError("r_mod is only defined for P1 problems")
        return self.group_caps[0].cap


def _target_rows(votes: VoteMatrix, indices: Sequence[int]) -> tuple[TargetRow, ...]:
    return tuple(
        TargetRow(
            index=j,
            votes=votes.votes[j],
            counts=votes.counts[j],
            pred=votes.predictions[j],
        )
        for j in indices
    )


def build_p2(
    votes: VoteMatrix,
    pair_structure: PairStructure,
    budget: Budget,
    rows: Optional[Sequence[int]] = None,
    apply_omega: bool = True,
) -> BilpProblem:
    """Hash-bagging attack problem: per-classifier variables, per-pair caps.

    ``rows`` restricts the candidate test rows (default: all); the breakable
    filter then drops rows whose margin the budget cannot close.
    """
    if pair_structure.num_classifiers != votes.num_classifiers:
        raise ValueError("pair structure does not match the vote matrix")
    candidates = range(votes.num_samples) if rows is None else rows
    if apply_omega:
        keep = set(omega_rows(votes, pair_structure, budget))
        candidates = [j for j in candidates if j in keep]
    cap = budget.per_pair_cap()
    groups = tuple(
        GroupCap(members=tuple(range(start, end)), cap=cap)
        for start, end in pair_structure.pair_ranges()
    )
    g = votes.num_classifiers
    return BilpProblem(
        mode=Mode.P2,
        decision_dim=g,
        pattern_sets=tuple((i,) for i in range(g)),
        multiplicities=(1,) * g,
        pattern_representatives=tuple(range(g)),
        group_caps=groups,
        target_rows=_target_rows(votes, candidates),
        num_classifiers=g,
        num_samples=votes.num_samples,
        num_classes=votes.num_classes,
    )


def build_p1(
    votes: VoteMatrix,
    membership: Membership,
    r_mod: int,
    rows: Optional[Sequence[int]] = None,
    apply_omega: bool = True,
) -> BilpProblem:
    """Modification-only attack problem over deduplicated influence patterns.

    Samples with identical S_i are merged: choosing a pattern twice costs
    budget without enlarging the influenced set, so one binary per distinct
    pattern suffices; multiplicities are kept for budget audits only.
    """
    if membership.num_classifiers != votes.num_classifiers:
        raise ValueError("membership does not match the vote matrix")
    if r_mod < 0:
        raise ValueError("r_mod must be >= 0")
    seen: dict[tuple[int, ...], int] = {}
    multiplicities: list[int] = []
    representatives: list[int] = []
    for i, s in enumerate(membership.sets):
        if s in seen:
            multiplicities[seen[s]] += 1
        else:
            seen[s] = len(multiplicities)
            multiplicities.append(1)
            representatives.append(i)
    patterns = tuple(seen)
    candidates = range(votes.num_samples) if rows is None else rows
    if apply_omega:
        # each controlled classifier moves a margin by at most 2
        sizes = sorted((len(s) for s in patterns), reverse=True)
        reach = min(votes.num_classifiers, sum(sizes[:r_mod]))
        candidates = [
            j
            for j in candidates
            if row_margin(votes.counts[j], votes.predictions[j]) <= 2 * reach
        ]
    return BilpProblem(
        mode=Mode.P1,
        decision_dim=len(patterns),
        pattern_sets=patterns,
        multiplicities=tuple(multiplicities),
        pattern_representatives=tuple(representatives),
        group_caps=(GroupCap(members=tuple(range(len(patterns))), cap=r_mod),),
        target_rows=_target_rows(votes, candidates),
        num_classifiers=votes.num_classifiers,
        num_samples=votes.num_samples,
        num_classes=votes.num_classes,
    )


@dataclass(frozen=True)
class ConstraintRow:
    """Sparse <= row: sum(coef * var) <= rhs."""

    coeffs: tuple[tuple[int, int], ...]
    rhs: int


@dataclass(frozen=True)
class StandardBilp:
    """Explicit 0/1 program with A (classifier), Y (row flipped), Z (rival
    beats winner), and W (training sample modified) variable blocks.

    Maximize sum(Y). All variables binary, all rows integer <= constraints.
    """

    num_a: int
    num_y: int
    num_classes: int
    num_w: int
    objective: tuple[tuple[int, int], ...]
    constraints: tuple[ConstraintRow, ...]
    big_m: int

    @property
    def num_variables(self) -> int:
        return self.num_a + self.num_y + self.num_y * self.num_classes + self.num_w

    def a_var(self, g: int) -> int:
        return g

    def y_var(self, t: int) -> int:
        return self.num_a + t

    def z_var(self, t: int, cls: int) -> int:
        return self.num_a + self.num_y + t * self.num_classes + cls

    def w_var(self, k: int) -> int:
        return self.num_a + self.num_y + self.num_y * self.num_classes + k

    def to_json_dict(self) -> dict:
        return {
            "blocks": {
                "A": self.num_a,
                "Y": self.num_y,
                "Z": self.num_y * self.num_classes,
                "W": self.num_w,
            },
            "num_variables": self.num_variables,
            "variable_type": "binary",
            "sense": "maximize",
            "objective": [list(term) for term in self.objective],
            "constraints": [
                {"coeffs": [list(c) for c in row.coeffs], "rhs": row.rhs, "op": "<="}
                for row in self.constraints
            ],
            "big_m": self.big_m,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, obj: dict) -> "StandardBilp":
        blocks = obj["blocks"]
        num_y = int(blocks["Y"])
        num_classes = int(blocks["Z"]) // num_y if num_y else 0
        return cls(
            num_a=int(blocks["A"]),
            num_y=num_y,
            num_classes=num_classes,
            num_w=int(blocks["W"]),
            objective=tuple((int(v), int(c)) for v, c in obj["objective"]),
            constraints=tuple(
                ConstraintRow(
                    coeffs=tuple((int(v), int(c)) for v, c in row["coeffs"]),
                    rhs=int(row["rhs"]),
                )
                for row in obj["constraints"]
            ),
            big_m=int(obj["big_m"]),
        )


def to_standard_form(
    problem: BilpProblem, membership: Optional[Membership] = None
) -> StandardBilp:
    """Re-encode a native problem as an explicit big-M 0/1 program.

    Z[t][l] may be 1 only when class l ties-or-beats the winner of target row
    t under the attack A; Y[t] may be 1 only when some class besides the
    winner does (the winner's own Z is always satisfiable, hence the
    threshold of 2). For P1 the A block is linked to the W (sample) block via
    the influence scopes; P2 has no W block and caps A per pair directly.

    Ties count as flips here: the smallest-index rule is intentionally not
    encoded.
    """
    g = problem.num_classifiers
    m = len(problem.target_rows)
    c = problem.num_classes
    big_m = 2 * g + 1
    if problem.mode is Mode.P1:
        if membership is None:
            raise ValueError("P1 standard form needs the membership for the W block")
        if membership.num_classifiers != g:
            raise ValueError("membership does not match the problem")
        num_w = membership.num_samples
    else:
        num_w = 0

    sb_shape = StandardBilp(
        num_a=g,
        num_y=m,
        num_classes=c,
        num_w=num_w,
        objective=(),
        constraints=(),
        big_m=big_m,
    )
    rows: list[ConstraintRow] = []

    if problem.mode is Mode.P1:
        r_mod = problem.r_mod()
        rows.append(
            ConstraintRow(
                coeffs=tuple((sb_shape.w_var(k), 1) for k in range(num_w)),
                rhs=r_mod,
            )
        )
        # A_i is available only if some chosen sample's scope covers classifier i
        for i in range(g):
            coeffs = [(sb_shape.a_var(i), 1)]
            for k in range(num_w):
                if i in membership.sets[k]:
                    coeffs.append((sb_shape.w_var(k), -1))
            rows.append(ConstraintRow(coeffs=tuple(coeffs), rhs=0))
    else:
        for grp in problem.group_caps:
            rows.append(
                ConstraintRow(
                    coeffs=tuple((sb_shape.a_var(v), 1) for v in grp.members),
                    rhs=grp.cap,
                )
            )

    for t, row in enumerate(problem.target_rows):
        for cls in range(c):
            # d0 <= swing(A) + big_m (1 - Z): rival cls ties-or-beats the winner
            d0 = row.counts[row.pred] - row.counts[cls]
            coeffs = []
            for gi in range(g):
                swing = 1 + (1 if row.votes[gi] == row.pred else 0) - (
                    1 if row.votes[gi] == cls else 0
                )
                if swing:
                    coeffs.append((sb_shape.a_var(gi), -swing))
            coeffs.append((sb_shape.z_var(t, cls), big_m))
            rows.append(ConstraintRow(coeffs=tuple(coeffs), rhs=big_m - d0))
    for t in range(m):
        # 2 - sum(Z_t) <= big_m (1 - Y_t): flipping needs a rival besides the winner
        coeffs = [(sb_shape.y_var(t), big_m)]
        coeffs.extend((sb_shape.z_var(t, cls), -1) for cls in range(c))
        rows.append(ConstraintRow(coeffs=tuple(coeffs), rhs=big_m - 2))

    return StandardBilp(
        num_a=g,
        num_y=m,
        num_classes=c,
        num_w=num_w,
        objective=tuple((sb_shape.y_var(t), 1) for t in range(m)),
        constraints=tuple(rows),
        big_m=big_m,
    )
