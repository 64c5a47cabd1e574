"""Accuracy and network size as the number of digit classes grows from 2 to 10.

    python scripts/class_degradation.py --strategies standard ovo ova minimal mid-length exhaustive
"""

import argparse
from pathlib import Path

from ecocneat.experiments import ExperimentConfig, sweep_degradation

STRATEGIES = {
    "standard": ("standard", None),
    "ovo": ("ovo", None),
    "ova": ("ova", None),
    "minimal": ("ecoc", "minimal"),
    "mid-length": ("ecoc", "mid-length"),
    "exhaustive": ("ecoc", "exhaustive"),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--strategies", nargs="+", default=["standard"], choices=sorted(STRATEGIES))
    ap.add_argument("--classes", type=int, nargs="+", default=list(range(2, 11)))
    ap.add_argument("--generations", type=int, default=3000)
    ap.add_argument("--repetitions", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="out/degradation")
    args = ap.parse_args()

    for name in args.strategies:
        strategy, bits = STRATEGIES[name]
        cfg = ExperimentConfig(strategy=strategy, bits=bits, generations=args.generations,
                               repetitions=args.repetitions, seed=args.seed, jobs=args.jobs,
                               out=str(Path(args.out) / name), curve_points=0)
        sweep_degradation(cfg, args.classes)


if __name__ == "__main__":
    main()
