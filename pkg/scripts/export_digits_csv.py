"""Write the bundled 8x8 digits data as a CSV (64 features, label last) for use
with ``--format csv``."""

import argparse
import csv

from ecocneat.datasets import load_sklearn_digits


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", nargs="?", default="digits.csv")
    args = ap.parse_args()
    d = load_sklearn_digits()
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"pixel{i}" for i in range(d.feature_dim)] + ["digit"])
        for row, label in zip(d.samples, d.labels):
            w.writerow([int(v) for v in row] + [d.class_names[label]])
    print(f"wrote {len(d)} rows to {args.out}")


if __name__ == "__main__":
    main()
