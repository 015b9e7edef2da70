#!/usr/bin/env python3
"""Writes tests/data/digits_0to5.csv: 100 images per digit 0-5 from the
8x8 handwritten digits set shipped with scikit-learn."""
import csv
import sys

import numpy as np
from sklearn.datasets import load_digits


def main(path):
    digits = load_digits()
    rng = np.random.default_rng(7)
    rows = []
    for label in range(6):
        idx = np.flatnonzero(digits.target == label)
        pick = np.sort(rng.choice(idx, size=100, replace=False))
        rows.extend((int(i), label) for i in pick)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "label"] + [f"px{k}" for k in range(64)])
        for i, label in rows:
            w.writerow([f"img{i}", label] + [int(v) for v in digits.data[i]])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/digits_0to5.csv")
