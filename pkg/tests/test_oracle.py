from __future__ import annotations

import random

import pytest

from helpers import golden_gap_instance, random_p1_instance, random_p2_instance
from poisoncert import (
    Budget,
    InstanceTooLargeError,
    Membership,
    PairStructure,
    VoteMatrix,
    build_p1,
    build_p2,
    evaluate_attack,
)
from poisoncert.oracle import (
    brute_force_p1,
    brute_force_p2,
    single_row_breakable,
)


class TestBruteForceP2:
    def test_golden_instance(self):
        votes, structure, budget = golden_gap_instance()
        best, witness = brute_force_p2(votes, structure, budget, return_witness=True)
        assert best == 2
        assert witness == (0,)  # lexicographically first optimum

    def test_zero_budget(self):
        votes, structure, _ = golden_gap_instance()
        best, witness = brute_force_p2(votes, structure, Budget(), return_witness=True)
        assert (best, witness) == (0, ())

    def test_controlling_everything_flips_everything(self):
        rng = random.Random(27)
        for _ in range(20):
            votes, structure, _ = random_p2_instance(rng, max_classifiers=6)
            full = Budget(r_ins=votes.num_classifiers)
            assert brute_force_p2(votes, structure, full) == votes.num_samples

    def test_witness_is_feasible_and_optimal(self):
        rng = random.Random(28)
        for _ in range(30):
            votes, structure, budget = random_p2_instance(rng, max_classifiers=7)
            best, witness = brute_force_p2(
                votes, structure, budget, return_witness=True
            )
            problem = build_p2(votes, structure, budget, apply_omega=False)
            assignment = [0] * problem.decision_dim
            for g in witness:
                assignment[g] = 1
            # feasibility is checked inside evaluate_attack
            assert evaluate_attack(problem, assignment) == best

    def test_deterministic_witness(self):
        rng = random.Random(29)
        votes, structure, budget = random_p2_instance(rng)
        a = brute_force_p2(votes, structure, budget, return_witness=True)
        b = brute_force_p2(votes, structure, budget, return_witness=True)
        assert a == b

    def test_size_cap(self):
        votes = VoteMatrix.from_votes((tuple([0] * 21),), num_classes=2)
        structure = PairStructure.single_pair(21)
        with pytest.raises(InstanceTooLargeError):
            brute_force_p2(votes, structure, Budget(r_ins=1))


class TestBruteForceP1:
    def test_matches_p2_on_identity_membership(self):
        rng = random.Random(30)
        for _ in range(25):
            g = rng.randint(1, 7)
            c = rng.randint(2, 3)
            votes = VoteMatrix.from_votes(
                tuple(
                    tuple(rng.randrange(c) for _ in range(g))
                    for _ in range(rng.randint(1, 4))
                ),
                num_classes=c,
            )
            membership = Membership(
                sets=tuple((i,) for i in range(g)), num_classifiers=g
            )
            structure = PairStructure.single_pair(g)
            r = rng.randint(0, g)
            assert brute_force_p1(votes, membership, r) == brute_force_p2(
                votes, structure, Budget(r_ins=r)
            )

    def test_witness_patterns_replay_to_the_optimum(self):
        rng = random.Random(31)
        for _ in range(25):
            votes, membership, r_mod = random_p1_instance(rng)
            best, witness = brute_force_p1(
                votes, membership, r_mod, return_witness=True
            )
            problem = build_p1(votes, membership, r_mod, apply_omega=False)
            rep_to_var = {
                rep: v for v, rep in enumerate(problem.pattern_representatives)
            }
            assignment = [0] * problem.decision_dim
            for rep in witness:
                assignment[rep_to_var[rep]] = 1
            assert evaluate_attack(problem, assignment) == best

    def test_duplicate_patterns_collapse(self):
        votes = VoteMatrix.from_votes(((0, 0, 1),), num_classes=2)
        dup = Membership(sets=((0,), (0,), (0,)), num_classifiers=3)
        # three copies of one pattern: budget 2 buys nothing beyond budget 1
        assert brute_force_p1(votes, dup, 1) == brute_force_p1(votes, dup, 2)

    def test_pattern_cap(self):
        votes = VoteMatrix.from_votes((tuple([0] * 21),), num_classes=2)
        membership = Membership(
            sets=tuple((i,) for i in range(21)), num_classifiers=21
        )
        with pytest.raises(InstanceTooLargeError):
            brute_force_p1(votes, membership, 1)


class TestSingleRow:
    def test_limit_short_circuits(self):
        # needs 3 controlled classifiers; a limit of 2 reports unbreakable
        row = (0,) * 5
        counts = (5, 0)
        assert single_row_breakable(row, counts, 0, 2) == 3
        assert single_row_breakable(row, counts, 0, 2, max_controlled=2) == 6
