"""Experiment orchestration: repeated runs, class-count sweeps, code-quality and
robustness studies, and the files they leave behind."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .binarization import (
    CodeError,
    EcocMatrix,
    classifier_count,
    code_of_size,
    decompose,
    ecoc_size,
    exhaustive_code,
    max_code_size,
    min_code_size,
    rank_codes,
    valid_subsets,
    ENUMERATION_CAP,
)
from .datasets import (
    DataError,
    Dataset,
    SplitPlan,
    class_subset,
    ingest_uci_ecoli,
    load_csv,
    load_sklearn_digits,
    load_whitespace,
    split,
)
from .ensemble import (
    Ensemble,
    accuracy,
    allocate_budget,
    predict_batch,
    save_ensemble,
    subsample,
    train_ensemble,
    training_curve,
)
from .metrics import complexity, mean_ci, rejection_curve_arrays, repetition_stats, score
from .neat import NeatConfig

FORMATS = ("csv", "ecoli", "whitespace", "sklearn-digits")
RUN_STRATEGIES = ("standard", "ovo", "ova", "ecoc")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    dataset: str = "digits"
    format: str = "sklearn-digits"
    label_column: int | str = -1
    strategy: str = "ecoc"
    # ecoc size: integer, "minimal", "mid-length" or "exhaustive"
    bits: int | str | None = None
    # optional archived code matrix (text format) used instead of sampling one
    code: str | None = None
    generations: int = 3000
    repetitions: int = 10
    seed: int = 0
    split_kind: str = "holdout"
    test_fraction: float = 0.1
    fold_count: int = 10
    split_seed: int = 0
    classes: list[int] | None = None
    normalize: bool = False
    neat: dict = field(default_factory=dict)
    out: str = "results"
    jobs: int = 1
    curve_points: int = 50

    def split_plan(self) -> SplitPlan:
        return SplitPlan(self.split_kind, self.fold_count, self.test_fraction, self.split_seed)

    def neat_config(self) -> NeatConfig:
        try:
            return NeatConfig.from_dict(self.neat)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad NEAT override: {exc}") from None

    def snapshot(self) -> dict:
        """Everything that determines the results (scheduling and output location excluded)."""
        d = asdict(self)
        for key in ("out", "jobs"):
            d.pop(key)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    fmt = cfg.format
    if fmt == "sklearn-digits":
        d = load_sklearn_digits()
    else:
        path = Path(cfg.dataset)
        if not path.exists():
            raise DataError(f"dataset file {path} does not exist")
        if fmt == "csv":
            d = load_csv(path, cfg.label_column)
        elif fmt == "ecoli":
            d = ingest_uci_ecoli(path)
        elif fmt == "whitespace":
            d = load_whitespace(path)
        else:
            raise ConfigError(f"unknown dataset format {fmt!r}; expected one of {FORMATS}")
    if cfg.classes is not None:
        d = class_subset(d, cfg.classes)
    if cfg.normalize:
        d = d.minmax_scaled()
    return d


def validate_config(cfg: ExperimentConfig, k: int) -> None:
    if cfg.strategy not in RUN_STRATEGIES:
        raise ConfigError(f"unknown strategy {cfg.strategy!r}; expected one of {RUN_STRATEGIES}")
    if cfg.generations < 1 or cfg.repetitions < 1:
        raise ConfigError("generations and repetitions must be >= 1")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    if cfg.format not in FORMATS:
        raise ConfigError(f"unknown dataset format {cfg.format!r}; expected one of {FORMATS}")
    try:
        cfg.split_plan()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg.neat_config()
    if cfg.strategy == "ecoc":
        if cfg.code is not None:
            m = EcocMatrix.load(cfg.code)
            if m.num_classes != k:
                raise ConfigError(f"code {cfg.code} has {m.num_classes} rows but the data has {k} classes")
        else:
            try:
                ecoc_size(k, cfg.bits)
            except (CodeError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
    elif cfg.bits is not None or cfg.code is not None:
        raise ConfigError(f"--bits/--code only apply to the ecoc strategy, not {cfg.strategy!r}")


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) & (2**64 - 1) for p in parts]).generate_state(1, np.uint64)[0])


def build_decomposition(cfg: ExperimentConfig, k: int, rep_seed: int):
    if cfg.strategy != "ecoc":
        return decompose(cfg.strategy, k)
    if cfg.code is not None:
        return decompose("ecoc", k, matrix=EcocMatrix.load(cfg.code))
    rng = np.random.default_rng(np.random.SeedSequence([rep_seed & (2**64 - 1), 0xC0DE]))
    return decompose("ecoc", k, cfg.bits, rng=rng)


# persistence ------------------------------------------------------------------


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str | Path, rows: Sequence[dict], columns: Sequence[str] | None = None) -> None:
    buf = io.StringIO()
    columns = list(columns or (rows[0].keys() if rows else []))
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    write_atomic(path, buf.getvalue())


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# single runs ------------------------------------------------------------------


@dataclass
class Repetition:
    seed: int
    test_accuracy: float
    train_accuracy: float
    mean_base_accuracy: float
    classifiers: int
    per_classifier_generations: int
    total_nodes: int
    total_nodes_excluding_inputs: int
    total_connections: int
    scores: dict
    archives: list[str]
    wall_time: float = 0.0


@dataclass
class RunRecord:
    config: dict
    repetitions: list[Repetition]
    method: str = ""

    def aggregate(self) -> dict:
        def stats(attr):
            vals = [getattr(r, attr) for r in self.repetitions]
            m, v = repetition_stats(vals)
            _, lo, hi = mean_ci(vals)
            return {"mean": m, "variance": v, "ci_low": lo, "ci_high": hi}

        return {
            "test_accuracy": stats("test_accuracy"),
            "train_accuracy": stats("train_accuracy"),
            "mean_base_accuracy": stats("mean_base_accuracy"),
            "total_nodes": stats("total_nodes"),
            "total_nodes_excluding_inputs": stats("total_nodes_excluding_inputs"),
            "total_connections": stats("total_connections"),
            "classifiers": self.repetitions[0].classifiers,
            "per_classifier_generations": self.repetitions[0].per_classifier_generations,
        }

    def to_json(self) -> str:
        reps = []
        for r in self.repetitions:
            d = asdict(r)
            d.pop("wall_time")
            reps.append(d)
        return dump_json({
            "version": __version__,
            "method": self.method,
            "config": self.config,
            "repetitions": reps,
            "aggregate": self.aggregate(),
        })

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        d = json.loads(text)
        reps = [Repetition(**r) for r in d["repetitions"]]
        return cls(d["config"], reps, d.get("method", ""))

    def mean_time_per_generation(self) -> float:
        gens = [r.classifiers * r.per_classifier_generations for r in self.repetitions]
        return float(np.mean([r.wall_time / g for r, g in zip(self.repetitions, gens)]))

    def table_row(self) -> str:
        a = self.aggregate()
        return (
            f"{self.method:<24} N={a['classifiers']:<4d} test={a['test_accuracy']['mean']:.3f} "
            f"var={a['test_accuracy']['variance']:.2e} train={a['train_accuracy']['mean']:.3f} "
            f"Ab={a['mean_base_accuracy']['mean']:.3f} s/gen={self.mean_time_per_generation():.3f}"
        )


def method_name(cfg: ExperimentConfig, k: int, n_classifiers: int) -> str:
    if cfg.strategy == "standard":
        return "Standard NEAT"
    if cfg.strategy == "ovo":
        return "OvO-NEAT"
    if cfg.strategy == "ova":
        return "OvA-NEAT"
    if cfg.code is None and cfg.bits in ("minimal", "exhaustive"):
        return f"{cfg.bits.capitalize()} ECOC-NEAT"
    if cfg.code is None and cfg.bits is None:
        return "Exhaustive ECOC-NEAT"
    return f"{n_classifiers}-bit ECOC-NEAT"


def evaluate_ensemble(e: Ensemble, train: Dataset, test: Dataset) -> tuple[float, float, np.ndarray, np.ndarray]:
    train_acc = accuracy(e, train)
    labels, conf, _ = predict_batch(e, test.samples)
    return train_acc, float(np.mean(labels == test.labels)), labels, conf


def run(cfg: ExperimentConfig, data: Dataset | None = None, write: bool = True, quiet: bool = False) -> RunRecord:
    """Train and evaluate ``cfg.repetitions`` times with seeds ``seed + r``."""
    data = data if data is not None else load_dataset(cfg)
    k = data.num_classes
    validate_config(cfg, k)
    ncfg = cfg.neat_config()
    try:
        folds = split(data, cfg.split_plan())
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out = Path(cfg.out)
    reps: list[Repetition] = []
    curve_rows: list[dict] = []
    name = ""
    for r in range(cfg.repetitions):
        rep_seed = cfg.seed + r
        t0 = time.perf_counter()
        test_accs, train_accs, bases, archives = [], [], [], []
        all_pred, all_true = [], []
        nodes = nodes_ni = conns = 0
        n_cls = per = 0
        for f, (train, test) in enumerate(folds):
            dec = build_decomposition(cfg, k, rep_seed)
            n_cls = dec.num_classifiers
            per = cfg.generations if dec.strategy == "standard" else allocate_budget(cfg.generations, n_cls).per_classifier
            train_seed = rep_seed if len(folds) == 1 else _derived_seed(rep_seed, f)
            e = train_ensemble(dec, train, ncfg, cfg.generations, train_seed, jobs=cfg.jobs)
            tr_acc, te_acc, labels, _ = evaluate_ensemble(e, train, test)
            test_accs.append(te_acc)
            train_accs.append(tr_acc)
            bases.append(e.mean_base_accuracy)
            all_pred.append(labels)
            all_true.append(test.labels)
            cx = complexity(e)
            nodes += cx.total_nodes
            nodes_ni += cx.total_nodes_no_inputs
            conns += cx.total_connections
            if write:
                rel = f"archives/rep{r:02d}_fold{f:02d}"
                save_ensemble(e, out / rel, {"seed": train_seed, "generations": cfg.generations, "per_classifier": per})
                archives.append(rel)
                if f == 0 and cfg.curve_points > 0:
                    for row in training_curve(e, train, cfg.curve_points):
                        curve_rows.append({"repetition": r, **row})
        nf = len(folds)
        rep = Repetition(
            seed=rep_seed,
            test_accuracy=float(np.mean(test_accs)),
            train_accuracy=float(np.mean(train_accs)),
            mean_base_accuracy=float(np.mean(bases)),
            classifiers=n_cls,
            per_classifier_generations=per,
            total_nodes=nodes // nf,
            total_nodes_excluding_inputs=nodes_ni // nf,
            total_connections=conns // nf,
            scores=score(np.concatenate(all_pred), np.concatenate(all_true), k).to_dict(),
            archives=archives,
            wall_time=time.perf_counter() - t0,
        )
        reps.append(rep)
        name = method_name(cfg, k, n_cls)
        if not quiet:
            print(f"  rep {r}: test={rep.test_accuracy:.4f} train={rep.train_accuracy:.4f} "
                  f"Ab={rep.mean_base_accuracy:.4f} ({rep.wall_time:.1f}s)", flush=True)
    record = RunRecord(cfg.snapshot(), reps, name)
    if write:
        write_atomic(out / "results.json", record.to_json())
        write_csv(out / "results.csv", _record_rows(record))
        write_atomic(out / "timings.json", dump_json({"wall_time": [r.wall_time for r in reps]}))
        if curve_rows:
            write_csv(out / "curve.csv", curve_rows)
    if not quiet:
        print(record.table_row(), flush=True)
    return record


def _record_rows(record: RunRecord) -> list[dict]:
    rows = []
    for i, r in enumerate(record.repetitions):
        rows.append({
            "row": i, "method": record.method, "classifiers": r.classifiers,
            "per_classifier_generations": r.per_classifier_generations,
            "test_accuracy": r.test_accuracy, "train_accuracy": r.train_accuracy,
            "mean_base_accuracy": r.mean_base_accuracy, "total_nodes": r.total_nodes,
            "total_connections": r.total_connections,
        })
    a = record.aggregate()
    for stat in ("mean", "variance"):
        rows.append({
            "row": stat, "method": record.method, "classifiers": a["classifiers"],
            "per_classifier_generations": a["per_classifier_generations"],
            "test_accuracy": a["test_accuracy"][stat], "train_accuracy": a["train_accuracy"][stat],
            "mean_base_accuracy": a["mean_base_accuracy"][stat], "total_nodes": a["total_nodes"][stat],
            "total_connections": a["total_connections"][stat],
        })
    return rows


# sweeps and studies -------------------------------------------------------------


def sweep_degradation(cfg: ExperimentConfig, class_counts: Sequence[int]) -> list[RunRecord]:
    """Repeat ``run`` on the first m classes for each m in ``class_counts``."""
    full = load_dataset(replace(cfg, classes=None, normalize=False))
    if max(class_counts) > full.num_classes or min(class_counts) < 2:
        raise ConfigError(f"class counts must lie in [2, {full.num_classes}]")
    for m in class_counts:
        validate_config(cfg, m)
    records, rows = [], []
    for m in class_counts:
        sub = replace(cfg, classes=list(range(m)), out=str(Path(cfg.out) / f"classes_{m:02d}"))
        print(f"[sweep] {m} classes", flush=True)
        rec = run(sub)
        records.append(rec)
        a = rec.aggregate()
        n, per = a["classifiers"], a["per_classifier_generations"]
        rows.append({
            "classes": m, "method": rec.method, "classifiers": n,
            "generations": f"{n * per}({per})",
            "test_accuracy": a["test_accuracy"]["mean"], "test_variance": a["test_accuracy"]["variance"],
            "ci_low": a["test_accuracy"]["ci_low"], "ci_high": a["test_accuracy"]["ci_high"],
            "train_accuracy": a["train_accuracy"]["mean"],
            "nodes": f"{a['total_nodes_excluding_inputs']['mean']:.0f}({a['total_nodes_excluding_inputs']['mean'] / n:.0f})",
            "nodes_with_inputs": f"{a['total_nodes']['mean']:.0f}({a['total_nodes']['mean'] / n:.0f})",
            "connections": f"{a['total_connections']['mean']:.0f}({a['total_connections']['mean'] / n:.0f})",
        })
    write_csv(Path(cfg.out) / "degradation.csv", rows)
    return records


def candidate_codes(k: int, n: int, candidate_count: int, rng: np.random.Generator,
                    cap: int = ENUMERATION_CAP) -> tuple[list[EcocMatrix], bool]:
    """All valid n-column sub-codes when enumerable, else ``candidate_count`` distinct samples."""
    total = max_code_size(k)
    if math.comb(total, n) <= cap:
        full = exhaustive_code(k)
        return [full.columns(cols) for cols in valid_subsets(k, n, cap)], True
    seen: set[tuple[int, ...]] = set()
    out = []
    for _ in range(candidate_count * 20):
        if len(out) == candidate_count:
            break
        m = code_of_size(k, n, rng)
        if m.column_origin not in seen:
            seen.add(m.column_origin)
            out.append(m)
    return out, False


def study_quality(cfg: ExperimentConfig, candidate_count: int = 10_000, per_tier: int = 1) -> dict:
    """Score minimal codes by the training accuracy of their exhaustive-column
    classifiers, then train representatives of each quality tier with the full budget."""
    data = load_dataset(cfg)
    k = data.num_classes
    validate_config(replace(cfg, strategy="ecoc", bits="minimal", code=None), k)
    ncfg = cfg.neat_config()
    train, test = split(data, cfg.split_plan())[0]
    out = Path(cfg.out)
    n_min = min_code_size(k)
    full = decompose("ecoc", k)

    col_acc = np.zeros(full.num_classifiers)
    for r in range(cfg.repetitions):
        print(f"[quality] exhaustive columns, repetition {r}", flush=True)
        e = train_ensemble(full, train, ncfg, cfg.generations, cfg.seed + r, jobs=cfg.jobs, keep_traces=False)
        col_acc += np.array(e.base_train_accuracy) / cfg.repetitions
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed & (2**64 - 1), 0x9A11]))
    pool, enumerated = candidate_codes(k, n_min, candidate_count, rng)
    ranked = rank_codes(pool, dict(enumerate(col_acc.tolist())))
    write_csv(out / "quality_pool.csv", [
        {"rank": i, "columns": " ".join(map(str, q.code.column_origin)), "mean_base_accuracy": q.mean_base_accuracy,
         "tier": q.tier}
        for i, q in enumerate(ranked)
    ])

    table, scatter = [], []
    for tier in ("middle", "high", "low"):
        members = [q for q in ranked if q.tier == tier]
        if not members:
            continue
        picks = rng.choice(len(members), size=min(per_tier, len(members)), replace=False)
        tests, trains, bases = [], [], []
        for p in sorted(picks.tolist()):
            code = members[p].code
            for r in range(cfg.repetitions):
                dec = decompose("ecoc", k, matrix=code)
                e = train_ensemble(dec, train, ncfg, cfg.generations, cfg.seed + r, jobs=cfg.jobs, keep_traces=False)
                tr_acc, te_acc, _, _ = evaluate_ensemble(e, train, test)
                tests.append(te_acc)
                trains.append(tr_acc)
                bases.append(e.mean_base_accuracy)
                scatter.append({
                    "tier": tier, "columns": " ".join(map(str, code.column_origin)), "repetition": r,
                    "base_error": 1 - e.mean_base_accuracy, "train_error": 1 - tr_acc, "test_error": 1 - te_acc,
                })
        m, v = repetition_stats(tests)
        table.append({
            "tier": tier, "test_accuracy": m, "test_variance": v,
            "train_accuracy": float(np.mean(trains)), "mean_base_accuracy": float(np.mean(bases)),
            "codes": len(picks),
        })
        print(f"[quality] {tier:<6} test={m:.3f} var={v:.2e} Ab={np.mean(bases):.3f}", flush=True)
    write_csv(out / "quality_table.csv", table)
    write_csv(out / "quality_scatter.csv", scatter)
    report = {
        "classes": k, "code_size": n_min, "pool_size": len(pool), "enumerated": enumerated,
        "tiers": {t: sum(q.tier == t for q in ranked) for t in ("high", "middle", "low")},
        "column_accuracy": col_acc.tolist(), "table": table, "config": cfg.snapshot(),
    }
    write_atomic(out / "quality.json", dump_json(report))
    return report


def subsample_accuracies(
    e: Ensemble, test: Dataset, keep_count: int, draws: int, rng: np.random.Generator, max_tries: int = 100
) -> list[dict]:
    """Test accuracy of ``draws`` random ``keep_count``-classifier sub-ensembles."""
    n = len(e.classifiers)
    out = []
    for _ in range(draws):
        sub = None
        for _ in range(max_tries):
            keep = np.sort(rng.choice(n, size=keep_count, replace=False)).tolist()
            try:
                sub = subsample(e, keep)
                collided = False
                break
            except CodeError:
                continue
        if sub is None:
            sub = subsample(e, keep, allow_collisions=True)
            collided = True
        labels, _, _ = predict_batch(sub, test.samples)
        out.append({"accuracy": float(np.mean(labels == test.labels)), "collisions": collided})
    return out


REJECTION_GRID = tuple(round(0.05 * i, 2) for i in range(20))


def robustness_rows(ensembles: dict[str, Ensemble], test: Dataset, keep_counts: Sequence[int], draws: int,
                    seed: int, repetition: int = 0) -> tuple[list[dict], list[dict]]:
    curve, rejection = [], []
    for strategy, e in ensembles.items():
        rng = np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), repetition, 0x5AB]))
        for kc in keep_counts:
            if kc > len(e.classifiers):
                continue
            for d, res in enumerate(subsample_accuracies(e, test, kc, draws, rng)):
                curve.append({"strategy": strategy, "repetition": repetition, "keep": kc, "draw": d, **res})
        labels, conf, _ = predict_batch(e, test.samples)
        rc = rejection_curve_arrays(conf, labels == test.labels, REJECTION_GRID)
        for rate, acc in rc.points:
            rejection.append({"strategy": strategy, "repetition": repetition, "rejection_rate": rate, "accuracy": acc})
    return curve, rejection


def summarize_robustness(curve: list[dict]) -> list[dict]:
    groups: dict[tuple[str, int], list[float]] = {}
    for row in curve:
        groups.setdefault((row["strategy"], row["keep"]), []).append(row["accuracy"])
    out = []
    for (strategy, kc), vals in sorted(groups.items()):
        m, lo, hi = mean_ci(vals)
        out.append({"strategy": strategy, "keep": kc, "mean_accuracy": m, "ci_low": lo, "ci_high": hi, "n": len(vals)})
    return out


def study_robustness(cfg: ExperimentConfig, keep_counts: Sequence[int], draws: int = 10) -> list[dict]:
    """Train OvO and an equally sized ECOC ensemble, then measure accuracy as
    classifiers are removed at random, plus accuracy-rejection curves."""
    data = load_dataset(cfg)
    k = data.num_classes
    ncfg = cfg.neat_config()
    n_ovo = classifier_count("ovo", k)
    bits = cfg.bits if cfg.bits is not None else min(n_ovo, max_code_size(k))
    validate_config(replace(cfg, strategy="ecoc", bits=bits, code=None), k)
    if max(keep_counts) > n_ovo or min(keep_counts) < 1:
        raise ConfigError(f"keep counts must lie in [1, {n_ovo}]")
    train, test = split(data, cfg.split_plan())[0]
    curve, rejection = [], []
    for r in range(cfg.repetitions):
        rep_seed = cfg.seed + r
        print(f"[robustness] repetition {r}", flush=True)
        ensembles = {
            "ovo": train_ensemble(decompose("ovo", k), train, ncfg, cfg.generations, rep_seed, jobs=cfg.jobs,
                                  keep_traces=False),
            "ecoc": train_ensemble(build_decomposition(replace(cfg, strategy="ecoc", bits=bits), k, rep_seed), train,
                                   ncfg, cfg.generations, rep_seed, jobs=cfg.jobs, keep_traces=False),
        }
        c, rj = robustness_rows(ensembles, test, keep_counts, draws, cfg.seed, r)
        curve += c
        rejection += rj
    out = Path(cfg.out)
    summary = summarize_robustness(curve)
    write_csv(out / "robustness_draws.csv", curve)
    write_csv(out / "robustness.csv", summary)
    write_csv(out / "rejection.csv", rejection)
    for row in summary:
        print(f"  {row['strategy']:<5} keep={row['keep']:<3d} acc={row['mean_accuracy']:.3f}", flush=True)
    return summary


def report(results_path: str | Path, out: str | Path | None = None) -> dict:
    """Average per-class scores and the confusion matrix over the repetitions of a run."""
    results_path = Path(results_path)
    if results_path.is_dir():
        results_path = results_path / "results.json"
    record = RunRecord.from_json(results_path.read_text())
    out = Path(out) if out else results_path.parent
    scores = [r.scores for r in record.repetitions]
    k = len(scores[0]["per_class"])
    avg = {}
    for metric in ("precision", "recall", "f1"):
        per_class = np.mean([[pc[metric] for pc in s["per_class"]] for s in scores], axis=0)
        avg[metric] = {
            "per_class": per_class.tolist(),
            **{agg: float(np.mean([s[agg][metric] for s in scores])) for agg in ("micro", "weighted", "macro")},
        }
    confusion = np.sum([s["confusion"] for s in scores], axis=0)
    rows = [{"class": c, **{m: avg[m]["per_class"][c] for m in avg}} for c in range(k)]
    rows += [{"class": agg, **{m: avg[m][agg] for m in avg}} for agg in ("micro", "weighted", "macro")]
    write_csv(out / "scores.csv", rows, ["class", "precision", "recall", "f1"])
    write_csv(out / "confusion.csv", [{"true": t, **{str(p): int(confusion[t, p]) for p in range(k)}} for t in range(k)])
    summary = {"method": record.method, "aggregate": record.aggregate(), "scores": avg, "confusion": confusion.tolist()}
    write_atomic(out / "report.json", dump_json(summary))
    return summary
