"""Write small CSVs in the BankSim and European card layouts.

Handy for exercising `qmlfraud preprocess` and `qmlfraud grid` without the
public files. The classes are shifted apart so models have something to learn.

    python scripts/make_synthetic_data.py --out data/synthetic --rows 2000
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from qmlfraud.dataprep import BANKSIM_COLUMNS, EUROPEAN_COLUMNS


def write_banksim(path, n_rows, fraud_rate, rng):
    labels = (rng.random(n_rows) < fraud_rate).astype(int)
    ages = list("0123456U")
    categories = ["es_food", "es_health", "es_travel", "es_tech", "es_transportation"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BANKSIM_COLUMNS)
        for y in labels:
            w.writerow([
                int(rng.integers(0, 180)),
                f"'C{rng.integers(1000, 1400)}'",
                f"'{ages[rng.integers(len(ages))]}'",
                f"'{'MFEU'[rng.integers(4)]}'",
                "'28007'",
                f"'M{rng.integers(100, 150)}'",
                "'28007'",
                f"'{categories[rng.integers(2, 5) if y else rng.integers(0, 5)]}'",
                f"{rng.exponential(40.0) + 250.0 * y:.2f}",
                int(y),
            ])
    return labels


def write_european(path, n_rows, fraud_rate, rng):
    labels = (rng.random(n_rows) < fraud_rate).astype(int)
    shift = np.where(np.arange(28) % 3 == 0, -1.5, 1.0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f'"{c}"' if c == "Class" else c for c in EUROPEAN_COLUMNS])
        for y in labels:
            v = rng.normal(size=28) + y * shift
            w.writerow(
                [f"{rng.uniform(0, 172792):.0f}"]
                + [f"{a:.6f}" for a in v]
                + [f"{rng.exponential(80.0):.2f}", f'"{y}"']
            )
    return labels


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("data/synthetic"))
    ap.add_argument("--rows", type=int, default=2000)
    ap.add_argument("--fraud-rate", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, writer in (("banksim.csv", write_banksim), ("creditcard.csv", write_european)):
        labels = writer(args.out / name, args.rows, args.fraud_rate, rng)
        print(f"{args.out / name}: {len(labels)} rows, {int(labels.sum())} fraud")


if __name__ == "__main__":
    main()
