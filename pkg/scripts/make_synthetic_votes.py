#!/usr/bin/env python3
"""Generate a synthetic vote matrix with controlled margins.

Rows cycle through a ladder of winner vote counts, so the sweep over poison
budgets retires rows in a controlled order. Votes are placed by a seeded RNG;
optional labels mark a fixed fraction of rows as correctly predicted.
"""

from __future__ import annotations

import argparse
import random


def synthetic_rows(
    num_classifiers: int,
    num_samples: int,
    num_classes: int,
    seed: int,
) -> list[list[int]]:
    rng = random.Random(seed)
    low = num_classifiers // 2 + 1  # strict majority up to unanimity
    rows = []
    for j in range(num_samples):
        winner_votes = low + (j * (num_classifiers - low)) // max(num_samples - 1, 1)
        winner = j % min(2, num_classes)
        row = []
        winners = set(rng.sample(range(num_classifiers), winner_votes))
        for g in range(num_classifiers):
            if g in winners:
                row.append(winner)
            else:
                others = [c for c in range(num_classes) if c != winner]
                row.append(rng.choice(others))
        rows.append(row)
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--classifiers", type=int, default=20)
    parser.add_argument("--samples", type=int, default=60)
    parser.add_argument("--classes", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--correct-fraction", type=float, default=0.8,
                        help="Fraction of rows whose label matches the prediction.")
    parser.add_argument("--out", required=True, help="Votes CSV path.")
    parser.add_argument("--labels-out", default=None, help="Optional labels CSV path.")
    args = parser.parse_args()

    rows = synthetic_rows(args.classifiers, args.samples, args.classes, args.seed)
    with open(args.out, "w") as fp:
        for row in rows:
            fp.write(",".join(str(v) for v in row) + "\n")
    print(f"wrote {args.samples}x{args.classifiers} votes to {args.out}")

    if args.labels_out:
        rng = random.Random(args.seed + 1)
        with open(args.labels_out, "w") as fp:
            for row in rows:
                counts = [row.count(c) for c in range(args.classes)]
                pred = max(range(args.classes), key=lambda c: (counts[c], -c))
                if rng.random() < args.correct_fraction:
                    fp.write(f"{pred}\n")
                else:
                    fp.write(f"{(pred + 1) % args.classes}\n")
        print(f"wrote labels to {args.labels_out}")


if __name__ == "__main__":
    main()
