#!/usr/bin/env python3
"""Tiny worked example of the sample-wise vs collective certification gap.

Three classifiers, three test samples, each sample outvoted 2:1 with a
different dissenter. Any single controlled classifier can flip any one
prediction, so the sample-wise certificate is 0; but one classifier can flip
at most two of the three rows at once, so one prediction is collectively
certified.
"""

from __future__ import annotations

from poisoncert import (
    Budget,
    PairStructure,
    VoteMatrix,
    brute_force_p2,
    certify,
    certify_decomposed,
    samplewise_collective_count,
)


def main() -> None:
    votes = VoteMatrix.from_votes([[1, 0, 0], [0, 1, 0], [0, 0, 1]], num_classes=2)
    structure = PairStructure.single_pair(3)
    budget = Budget(r_ins=1)  # the attacker may influence one classifier

    print("votes (rows = test samples, columns = classifiers):")
    for row in votes.votes:
        print("  ", list(row))

    sw = samplewise_collective_count(votes, structure, budget)
    print(f"sample-wise certified robustness: {sw}")

    cert = certify(votes, structure, budget)
    print(
        f"collective certified robustness:  {cert.collective_robustness_lb}"
        f" (attack bound {cert.attacked_ub}, status {cert.status.value})"
    )

    dec = certify_decomposed(votes, structure, budget, delta=2)
    print(f"decomposed (delta=2) lower bound: {dec.collective_robustness_lb}")

    best, witness = brute_force_p2(votes, structure, budget, return_witness=True)
    print(f"brute-force check: max {best} rows flipped, e.g. controlling {list(witness)}")


if __name__ == "__main__":
    main()
