"""Shared fixtures and independent oracles for the test suite.

Everything here is deliberately low-tech: plain enumeration, no reuse of the
package's swing or bound arithmetic, so equality checks against the package
exercise two separate derivations.
"""

from __future__ import annotations

import random
from itertools import combinations, product
from typing import Sequence

from poisoncert import (
    Budget,
    Membership,
    PairStructure,
    StandardBilp,
    VoteMatrix,
)


# ---------------------------------------------------------------------------
# fixed instances
# ---------------------------------------------------------------------------


def golden_gap_instance() -> tuple[VoteMatrix, PairStructure, Budget]:
    """Three classifiers, three samples, one pair, one influenced classifier.

    Each row has a different dissenting classifier, so any single classifier
    is a winner-voter on exactly two rows: sample-wise reasoning breaks every
    row individually, the collective attack flips at most two at once.
    """
    votes = VoteMatrix.from_votes(
        (
            (1, 0, 0),
            (0, 1, 0),
            (0, 0, 1),
        ),
        num_classes=2,
    )
    structure = PairStructure.single_pair(num_classifiers=3)
    return votes, structure, Budget(r_ins=1)


GOLDEN_LABELS = (0, 1, 0)


# ---------------------------------------------------------------------------
# seeded generators
# ---------------------------------------------------------------------------


def random_vote_matrix(
    rng: random.Random,
    num_classifiers: int,
    num_samples: int,
    num_classes: int,
) -> VoteMatrix:
    rows = tuple(
        tuple(rng.randrange(num_classes) for _ in range(num_classifiers))
        for _ in range(num_samples)
    )
    return VoteMatrix.from_votes(rows, num_classes=num_classes)


def random_pair_structure(rng: random.Random, num_classifiers: int) -> PairStructure:
    g_hat = rng.randint(1, num_classifiers)
    return PairStructure.for_counts(num_classifiers=num_classifiers, g_hat=g_hat)


def budget_with_cap(rng: random.Random, cap: int) -> Budget:
    """A random (r_ins, r_del, r_mod) split whose per-pair cap is exactly `cap`."""
    r_mod = rng.randint(0, cap // 2)
    rest = cap - 2 * r_mod
    r_ins = rng.randint(0, rest)
    return Budget(r_ins=r_ins, r_del=rest - r_ins, r_mod=r_mod)


def random_p2_instance(
    rng: random.Random,
    max_classifiers: int = 10,
    max_samples: int = 6,
    max_classes: int = 3,
) -> tuple[VoteMatrix, PairStructure, Budget]:
    g = rng.randint(1, max_classifiers)
    m = rng.randint(1, max_samples)
    c = rng.randint(2, max_classes)
    votes = random_vote_matrix(rng, g, m, c)
    structure = random_pair_structure(rng, g)
    budget = budget_with_cap(rng, rng.randint(0, g))
    return votes, structure, budget


def random_membership(
    rng: random.Random,
    num_classifiers: int,
    num_samples: int,
    max_scope: int | None = None,
) -> Membership:
    limit = num_classifiers if max_scope is None else max_scope
    sets = []
    for _ in range(num_samples):
        size = rng.randint(0, min(limit, num_classifiers))
        sets.append(tuple(sorted(rng.sample(range(num_classifiers), size))))
    return Membership(num_classifiers=num_classifiers, sets=tuple(sets))


def random_p1_instance(
    rng: random.Random,
    max_classifiers: int = 8,
    max_samples: int = 6,
    max_classes: int = 3,
    max_records: int = 10,
    max_budget: int = 4,
) -> tuple[VoteMatrix, Membership, int]:
    g = rng.randint(1, max_classifiers)
    m = rng.randint(1, max_samples)
    c = rng.randint(2, max_classes)
    votes = random_vote_matrix(rng, g, m, c)
    membership = random_membership(rng, g, rng.randint(1, max_records))
    r_mod = rng.randint(0, max_budget)
    return votes, membership, r_mod


# ---------------------------------------------------------------------------
# membership diffing
# ---------------------------------------------------------------------------


def classifier_contents(records, membership: Membership) -> list[list[bytes]]:
    """Sorted payload multiset each classifier trains on."""
    contents: list[list[bytes]] = [[] for _ in range(membership.num_classifiers)]
    for record, scopes in zip(records, membership.sets):
        for g in scopes:
            contents[g].append(record.payload)
    return [sorted(c) for c in contents]


def changed_per_pair(
    before: list[list[bytes]],
    after: list[list[bytes]],
    pair_structure: PairStructure,
) -> list[int]:
    """Per-pair count of classifiers whose training content differs."""
    changed = [0] * pair_structure.num_pairs
    for g in range(pair_structure.num_classifiers):
        if before[g] != after[g]:
            changed[pair_structure.pair_of_classifier[g]] += 1
    return changed


# ---------------------------------------------------------------------------
# independent row-level oracles
# ---------------------------------------------------------------------------


def _winner(counts: Sequence[int]) -> int:
    best = 0
    for label in range(1, len(counts)):
        if counts[label] > counts[best]:
            best = label
    return best


def exhaustive_min_controlled(
    votes_row: Sequence[int], num_classes: int
) -> int:
    """Smallest controlled set that can flip the row, by full enumeration.

    Tries every subset of classifiers and every reassignment of their votes,
    so it is only usable for tiny rows. Returns G + 1 when no subset works.
    """
    g = len(votes_row)
    base = [0] * num_classes
    for vote in votes_row:
        base[vote] += 1
    pred = _winner(base)
    for size in range(g + 1):
        for subset in combinations(range(g), size):
            for reassignment in product(range(num_classes), repeat=size):
                counts = list(base)
                for member, new_vote in zip(subset, reassignment):
                    counts[votes_row[member]] -= 1
                    counts[new_vote] += 1
                # _winner already resolves ties to the smallest index, so a
                # tie stolen by a lower class shows up as winner != pred
                if _winner(counts) != pred:
                    return size
    return g + 1


def exhaustive_tolerable_budget(membership: Membership) -> int | float:
    """Minimum number of samples whose combined scope exceeds G / 2.

    Plain subset enumeration over sample indices, independent of the
    package's pruned search. Returns float("inf") when impossible.
    """
    g = membership.num_classifiers
    target = g // 2 + 1
    n = len(membership.sets)
    for size in range(0, n + 1):
        for subset in combinations(range(n), size):
            covered = set()
            for j in subset:
                covered.update(membership.sets[j])
            if len(covered) >= target:
                return size
    return float("inf")


# ---------------------------------------------------------------------------
# serialized-program brute evaluator
# ---------------------------------------------------------------------------


def solve_standard_brute(program: StandardBilp) -> int:
    """Optimum of a serialized program by enumerating its decision block.

    Works off the constraint rows literally. W (or A when no W block exists)
    is enumerated; A, Z and Y are then raised greedily, which is optimal here
    because each appears with nonpositive coefficients in every row other
    than the one that licenses it.
    """
    total = program.num_variables
    rows = program.constraints

    def feasible(x: list[int]) -> bool:
        for row in rows:
            acc = 0
            for var, coeff in row.coeffs:
                acc += coeff * x[var]
            if acc > row.rhs:
                return False
        return True

    if program.num_w:
        block = [program.w_var(k) for k in range(program.num_w)]
    else:
        block = [program.a_var(g) for g in range(program.num_a)]

    upgrades: list[int] = []
    if program.num_w:
        upgrades.extend(program.a_var(g) for g in range(program.num_a))
    for t in range(program.num_y):
        upgrades.extend(
            program.z_var(t, label) for label in range(program.num_classes)
        )
    upgrades.extend(program.y_var(t) for t in range(program.num_y))

    objective = dict(program.objective)
    best = 0
    for mask in range(1 << len(block)):
        x = [0] * total
        for bit, var in enumerate(block):
            x[var] = (mask >> bit) & 1
        if not feasible(x):
            continue
        for var in upgrades:
            x[var] = 1
            if not feasible(x):
                x[var] = 0
        value = sum(coeff * x[var] for var, coeff in objective.items())
        if value > best:
            best = value
    return best


# ---------------------------------------------------------------------------
# tie-break screen for serialized-program comparisons
# ---------------------------------------------------------------------------


def _pattern_catalog(membership: Membership) -> list[tuple[int, ...]]:
    seen: dict[tuple[int, ...], None] = {}
    for scope in membership.sets:
        if scope and scope not in seen:
            seen[scope] = None
    return list(seen)


def tie_break_never_binds(
    votes: VoteMatrix, membership: Membership, r_mod: int
) -> bool:
    """True when no feasible attack flips a row only through the tie rule.

    The serialized program treats a tied top count as a flip regardless of
    class order, so instances where some attack produces a decisive tie in
    pred's favour are screened out before comparing optima.
    """
    patterns = _pattern_catalog(membership)
    if len(patterns) > 16:
        raise ValueError("screen is exhaustive; keep instances tiny")
    for size in range(min(r_mod, len(patterns)) + 1):
        for chosen in combinations(patterns, size):
            controlled = set()
            for scope in chosen:
                controlled.update(scope)
            for t in range(votes.num_samples):
                row = votes.votes[t]
                pred = votes.predictions[t]
                counts = votes.counts[t]
                strict = False
                tied_only = False
                for label in range(votes.num_classes):
                    if label == pred:
                        continue
                    swing = sum(
                        1 + (row[g] == pred) - (row[g] == label)
                        for g in controlled
                    )
                    deficit = counts[pred] - counts[label]
                    if swing > deficit:
                        strict = True
                    elif swing == deficit:
                        if label < pred:
                            strict = True
                        else:
                            tied_only = True
                if tied_only and not strict:
                    return False
    return True


# ---------------------------------------------------------------------------
# synthetic votes with a controlled margin ladder
# ---------------------------------------------------------------------------


def ladder_votes(
    rng: random.Random,
    num_classifiers: int,
    num_samples: int,
    num_classes: int = 2,
) -> tuple[tuple[int, ...], ...]:
    """Rows whose winning counts sweep from bare majority to unanimity."""
    low = num_classifiers // 2 + 1
    rows = []
    for j in range(num_samples):
        span = max(num_samples - 1, 1)
        strength = low + (j * (num_classifiers - low)) // span
        winner = j % min(2, num_classes)
        loser = (winner + 1) % num_classes
        row = [loser] * num_classifiers
        for g in rng.sample(range(num_classifiers), strength):
            row[g] = winner
        rows.append(tuple(row))
    return tuple(rows)
