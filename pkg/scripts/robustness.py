"""Accuracy of OvO and equally sized ECOC ensembles as base classifiers are
removed at random, plus accuracy-rejection curves of the full ensembles.

    python scripts/robustness.py --keep 1 5 10 15 22 30 40 45
"""

import argparse

from ecocneat.experiments import ExperimentConfig, study_robustness


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--keep", type=int, nargs="+", default=[1, 5, 10, 15, 22, 30, 40, 45])
    ap.add_argument("--draws", type=int, default=10)
    ap.add_argument("--generations", type=int, default=3000)
    ap.add_argument("--repetitions", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="out/robustness")
    args = ap.parse_args()
    cfg = ExperimentConfig(generations=args.generations, repetitions=args.repetitions, seed=args.seed,
                           jobs=args.jobs, out=args.out)
    study_robustness(cfg, args.keep, args.draws)


if __name__ == "__main__":
    main()
