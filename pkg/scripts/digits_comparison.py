"""Comparison of methods on the digits data (one row per method).

    python scripts/digits_comparison.py --generations 3000 --repetitions 10 --out out/comparison
"""

import argparse
from pathlib import Path

from ecocneat.experiments import ExperimentConfig, run, write_csv

METHODS = [
    ("standard", None),
    ("ovo", None),
    ("ova", None),
    ("ecoc", "minimal"),
    ("ecoc", 10),
    ("ecoc", 45),
    ("ecoc", 100),
    ("ecoc", 250),
    ("ecoc", "exhaustive"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--generations", type=int, default=3000)
    ap.add_argument("--repetitions", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--only", nargs="*", help="subset of method labels, e.g. ovo ecoc-45")
    ap.add_argument("--out", default="out/comparison")
    args = ap.parse_args()

    rows = []
    for strategy, bits in METHODS:
        label = strategy if bits is None else f"ecoc-{bits}"
        if args.only and label not in args.only:
            continue
        cfg = ExperimentConfig(strategy=strategy, bits=bits, generations=args.generations,
                               repetitions=args.repetitions, seed=args.seed, jobs=args.jobs,
                               out=str(Path(args.out) / label))
        print(f"== {label}", flush=True)
        rec = run(cfg)
        a = rec.aggregate()
        rows.append({
            "method": rec.method, "classifiers": a["classifiers"],
            "test_accuracy": a["test_accuracy"]["mean"], "test_variance": a["test_accuracy"]["variance"],
            "train_accuracy": a["train_accuracy"]["mean"], "mean_base_accuracy": a["mean_base_accuracy"]["mean"],
            "seconds_per_generation": rec.mean_time_per_generation(),
        })
    write_csv(Path(args.out) / "comparison.csv", rows)
    for r in rows:
        print(f"{r['method']:<24} {r['classifiers']:>4} {r['test_accuracy']:.3f} {r['test_variance']:.2e} "
              f"{r['train_accuracy']:.3f} {r['mean_base_accuracy']:.3f} {r['seconds_per_generation']:.2f}")


if __name__ == "__main__":
    main()
