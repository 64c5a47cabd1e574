"""Rank minimal codes by the training accuracy of their columns' classifiers and
train representatives of the low, middle and high tiers.

    python scripts/code_quality.py --dataset sat.trn --format whitespace --per-tier 6
    python scripts/code_quality.py --candidates 10000 --per-tier 9      # digits
"""

import argparse

from ecocneat.experiments import ExperimentConfig, study_quality


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--dataset", default="digits")
    ap.add_argument("--format", default="sklearn-digits")
    ap.add_argument("--candidates", type=int, default=10_000)
    ap.add_argument("--per-tier", type=int, default=1)
    ap.add_argument("--generations", type=int, default=3000)
    ap.add_argument("--repetitions", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="out/quality")
    args = ap.parse_args()
    cfg = ExperimentConfig(dataset=args.dataset, format=args.format, strategy="ecoc", bits="minimal",
                           generations=args.generations, repetitions=args.repetitions, seed=args.seed,
                           jobs=args.jobs, out=args.out)
    rep = study_quality(cfg, args.candidates, args.per_tier)
    print(f"pool of {rep['pool_size']} minimal codes ({'all valid subsets' if rep['enumerated'] else 'sampled'}), "
          f"tiers {rep['tiers']}")


if __name__ == "__main__":
    main()
