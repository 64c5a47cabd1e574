"""Command-line entry point.

    ecocneat run --strategy ecoc --bits minimal --generations 3000 --out out/minimal
    ecocneat sweep --strategy standard --classes 2 3 4 5 --out out/sweep
    ecocneat quality --config quality.json
    ecocneat robustness --keep 1 5 10 22 45
    ecocneat ecoc gen --classes 10 --bits 15 --seed 3
    ecocneat report out/minimal

Values come from flags, then the JSON file given by --config, then defaults.
Exit codes: 0 success, 2 config error, 3 data error, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments as ex
from .binarization import CodeError, EcocMatrix, code_of_size, count_valid_subsets, ecoc_size, exhaustive_code, validate
from .datasets import DataError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4

# flag name -> ExperimentConfig field
COMMON = {
    "dataset": "dataset",
    "format": "format",
    "strategy": "strategy",
    "bits": "bits",
    "code": "code",
    "generations": "generations",
    "repetitions": "repetitions",
    "seed": "seed",
    "jobs": "jobs",
    "out": "out",
    "split": "split_kind",
    "folds": "fold_count",
    "test_fraction": "test_fraction",
    "normalize": "normalize",
}


def _bits(value: str) -> int | str:
    if value in ("minimal", "mid-length", "exhaustive"):
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or minimal/mid-length/exhaustive, got {value!r}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--dataset", help="data file path (ignored for sklearn-digits)")
    p.add_argument("--format", choices=ex.FORMATS)
    p.add_argument("--strategy", choices=ex.RUN_STRATEGIES)
    p.add_argument("--bits", type=_bits, help="ECOC size: integer, minimal, mid-length or exhaustive")
    p.add_argument("--code", help="code matrix file to use instead of sampling one")
    p.add_argument("--generations", type=int, help="total generation budget G")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.add_argument("--split", choices=("holdout", "kfold"))
    p.add_argument("--folds", type=int)
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--normalize", action="store_true", default=None, help="min-max scale features")
    p.add_argument("--neat", action="append", default=[], metavar="KEY=VALUE",
                   help="NEAT parameter override (JSON value), repeatable")


def build_config(args: argparse.Namespace) -> ex.ExperimentConfig:
    cfg = ex.ExperimentConfig.from_json(args.config) if args.config else ex.ExperimentConfig()
    updates = {}
    for flag, name in COMMON.items():
        v = getattr(args, flag, None)
        if v is not None:
            updates[name] = v
    if args.neat:
        neat = dict(cfg.neat)
        for item in args.neat:
            key, sep, raw = item.partition("=")
            if not sep:
                raise ex.ConfigError(f"--neat expects KEY=VALUE, got {item!r}")
            try:
                neat[key] = json.loads(raw)
            except json.JSONDecodeError:
                neat[key] = raw
        updates["neat"] = neat
    if getattr(args, "classes_subset", None):
        updates["classes"] = args.classes_subset
    cfg = replace(cfg, **updates)
    if cfg.format != "sklearn-digits" and cfg.dataset == "digits":
        raise ex.ConfigError(f"--dataset is required for format {cfg.format!r}")
    return cfg


def cmd_run(args) -> int:
    ex.run(build_config(args))
    return EXIT_OK


def cmd_sweep(args) -> int:
    ex.sweep_degradation(build_config(args), args.classes)
    return EXIT_OK


def cmd_quality(args) -> int:
    ex.study_quality(build_config(args), args.candidates, args.per_tier)
    return EXIT_OK


def cmd_robustness(args) -> int:
    ex.study_robustness(build_config(args), args.keep, args.draws)
    return EXIT_OK


def cmd_report(args) -> int:
    summary = ex.report(args.results, args.out)
    agg = summary["aggregate"]
    print(f"{summary['method']}: test accuracy {agg['test_accuracy']['mean']:.4f} "
          f"(var {agg['test_accuracy']['variance']:.2e})")
    for metric, vals in summary["scores"].items():
        print(f"  {metric:<9} micro={vals['micro']:.4f} macro={vals['macro']:.4f} weighted={vals['weighted']:.4f}")
    return EXIT_OK


def cmd_ecoc(args) -> int:
    if args.ecoc_cmd == "gen":
        try:
            n = ecoc_size(args.classes, args.bits)
        except (CodeError, ValueError) as exc:
            raise ex.ConfigError(str(exc)) from None
        if n == ecoc_size(args.classes, "exhaustive"):
            m = exhaustive_code(args.classes)
        else:
            m = code_of_size(args.classes, n, np.random.default_rng(args.seed))
        if args.out:
            m.save(args.out)
        else:
            sys.stdout.write(m.to_text())
    elif args.ecoc_cmd == "validate":
        try:
            m = EcocMatrix.load(args.path)
        except (OSError, ValueError) as exc:
            raise DataError(f"{args.path}: {exc}") from None
        report = validate(m)
        for msg in report.messages():
            print(msg)
        print("ok" if report.ok else "invalid")
        return EXIT_OK if report.ok else EXIT_DATA
    else:
        try:
            print(count_valid_subsets(args.classes, ecoc_size(args.classes, args.bits)))
        except (CodeError, ValueError) as exc:
            raise ex.ConfigError(str(exc)) from None
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecocneat", description="NEAT ensembles with class binarization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="repeated training and evaluation of one method")
    _add_common(p)
    p.add_argument("--classes", dest="classes_subset", type=int, nargs="+", help="keep only these class ids")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="accuracy as the number of classes grows")
    _add_common(p)
    p.add_argument("--classes", type=int, nargs="+", required=True, help="class counts m (first m classes)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("quality", help="rank minimal codes and train tier representatives")
    _add_common(p)
    p.add_argument("--candidates", type=int, default=10_000)
    p.add_argument("--per-tier", type=int, default=1)
    p.set_defaults(func=cmd_quality)

    p = sub.add_parser("robustness", help="accuracy under random classifier removal")
    _add_common(p)
    p.add_argument("--keep", type=int, nargs="+", required=True)
    p.add_argument("--draws", type=int, default=10)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("report", help="per-class scores and confusion matrix for a finished run")
    p.add_argument("results", help="results.json or its directory")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("ecoc", help="code matrix utilities")
    esub = p.add_subparsers(dest="ecoc_cmd", required=True)
    g = esub.add_parser("gen")
    g.add_argument("--classes", type=int, required=True)
    g.add_argument("--bits", type=_bits, default="minimal")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    v = esub.add_parser("validate")
    v.add_argument("path")
    c = esub.add_parser("count")
    c.add_argument("--classes", type=int, required=True)
    c.add_argument("--bits", type=_bits, default="minimal")
    p.set_defaults(func=cmd_ecoc)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ex.ConfigError, CodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
