#!/usr/bin/env python3
"""Brute-force counts for the hand-labeled set in tests/support/oracle_set.hpp."""
from fractions import Fraction

ROWS = [
    (1, .90, 0, 0, "E"), (1, .80, 1, 1, "I"), (1, .40, 2, 1, "S"), (0, .10, 0, 0, "-"), (0, .60, 0, 1, "-"),
    (1, .50, 1, 1, "E"), (0, .49, 1, 1, "-"), (1, .20, 0, 2, "I"), (0, .00, 2, 2, "-"), (1, .99, 2, 2, "E"),
    (0, .70, 0, 0, "-"), (1, .55, 0, 0, "I"), (0, .30, 1, 0, "-"), (1, .45, 1, 2, "S"), (0, .05, 0, 0, "-"),
    (1, .51, 2, 0, "I"), (0, .50, 2, 2, "-"), (1, .95, 0, 0, "E"), (0, .15, 1, 1, "-"), (1, .65, 1, 1, "S"),
]


def main():
    tp = fp = tn = fn = 0
    for gold, prob, *_ in ROWS:
        pred = prob >= 0.5
        if gold and pred:
            tp += 1
        elif gold:
            fn += 1
        elif pred:
            fp += 1
        else:
            tn += 1
    p = Fraction(tp, tp + fp)
    r = Fraction(tp, tp + fn)
    print(f"tp={tp} fp={fp} tn={tn} fn={fn}")
    print(f"precision={p} recall={r} f1={2 * p * r / (p + r)} cdr={r}")
    for k, name in enumerate(["mild", "moderate", "strong"]):
        rows = [x for x in ROWS if x[2] == k]
        print(f"depth.{name}={Fraction(sum(x[3] == k for x in rows), len(rows))}")
    for m in "EIS":
        rows = [x for x in ROWS if x[4] == m]
        print(f"recall.{m}={Fraction(sum(x[1] >= 0.5 for x in rows), len(rows))}")


if __name__ == "__main__":
    main()
