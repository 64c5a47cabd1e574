"""Training NEAT base classifiers under a shared generation budget and fusing
their outputs: OvO voting, OvA max score and ECOC hamming decoding."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .binarization import CodeError, Decomposition, EcocMatrix, decompose
from .datasets import DataError, Dataset, binary_view
from .neat import NeatConfig
from .neat.evolution import EvolutionTrace, evolve
from .neat.genome import Genome, dumps, loads, softmax


@dataclass(frozen=True)
class BudgetPlan:
    total_generations: int
    per_classifier: int
    classifier_count: int

    @property
    def effective_total(self) -> int:
        return self.per_classifier * self.classifier_count


def allocate_budget(total: int, n: int) -> BudgetPlan:
    """Generations per classifier: G/n rounded to nearest (halves up), at least 1."""
    if total < 1 or n < 1:
        raise ValueError(f"total generations and classifier count must be positive, got {total}, {n}")
    per = max(1, (2 * total + n) // (2 * n))
    return BudgetPlan(total, per, n)


@dataclass
class Ensemble:
    decomposition: Decomposition
    classifiers: list[Genome]
    base_train_accuracy: list[float]
    training_traces: list[EvolutionTrace] = field(default_factory=list)

    @property
    def strategy(self) -> str:
        return self.decomposition.strategy

    @property
    def num_classes(self) -> int:
        return self.decomposition.num_classes

    @property
    def mean_base_accuracy(self) -> float:
        return float(np.mean(self.base_train_accuracy))


@dataclass
class Prediction:
    label: int
    confidence: float
    raw: np.ndarray


def task_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Independent stream per task, derived from (seed, task index) only."""
    return np.random.SeedSequence([int(seed) & (2**64 - 1), index])


def _train_one(args):
    data, cfg, generations, seed, index = args
    best, trace = evolve(cfg, data, generations, np.random.default_rng(task_seed(seed, index)))
    return best, trace


def train_ensemble(
    d: Decomposition,
    train: Dataset,
    cfg: NeatConfig,
    total_generations: int,
    seed: int,
    jobs: int = 1,
    keep_traces: bool = True,
) -> Ensemble:
    """Evolve one classifier per task with ``round(G / N)`` generations each
    (the standard strategy trains a single k-output network for G generations)."""
    if train.num_classes != d.num_classes:
        raise DataError(f"training data has {train.num_classes} classes, decomposition expects {d.num_classes}")
    if d.strategy == "standard":
        jobs_args = [(train, cfg.with_io(train.feature_dim, d.num_classes), total_generations, seed, 0)]
    else:
        plan = allocate_budget(total_generations, len(d.tasks))
        bcfg = cfg.with_io(train.feature_dim, 2)
        jobs_args = []
        for j, task in enumerate(d.tasks):
            view = binary_view(train, task.positives, task.negatives, task.restrict_to_members)
            y = view.arrays()[1]
            if y.size == 0 or y.min() == y.max():
                raise DataError(f"task {j} has an empty positive or negative sample set")
            jobs_args.append((view, bcfg, plan.per_classifier, seed, j))

    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_train_one, jobs_args))
    else:
        results = [_train_one(a) for a in jobs_args]
    classifiers = [best for best, _ in results]
    return Ensemble(
        d,
        classifiers,
        [float(best.fitness) for best in classifiers],
        [trace for _, trace in results] if keep_traces else [],
    )


# decoding ---------------------------------------------------------------------


def hamming_distance(a, b) -> int:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def decode_ecoc(m: EcocMatrix, codeword) -> tuple[int, int]:
    """Nearest row by hamming distance (lowest row on ties) and the margin
    between the two smallest distances."""
    codeword = np.asarray(codeword)
    if codeword.shape != (m.num_columns,):
        raise ValueError(f"codeword length {codeword.shape} does not match {m.num_columns} columns")
    labels, margins = decode_ecoc_batch(m, codeword[None, :])
    return int(labels[0]), int(margins[0])


def decode_ecoc_batch(m: EcocMatrix, codewords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cw = np.asarray(codewords, dtype=np.int64)
    bits = m.bits.astype(np.int64)
    # |a-b| summed over bits == number of differing positions
    dist = cw.sum(axis=1, keepdims=True) + bits.sum(axis=1)[None, :] - 2 * cw @ bits.T
    labels = np.argmin(dist, axis=1)
    if dist.shape[1] > 1:
        part = np.partition(dist, 1, axis=1)
        margins = part[:, 1] - part[:, 0]
    else:
        margins = np.zeros(len(cw), dtype=np.int64)
    return labels, margins


def _top_two_gap(scores: np.ndarray) -> np.ndarray:
    if scores.shape[1] < 2:
        return np.zeros(len(scores))
    part = np.sort(scores, axis=1)
    return part[:, -1] - part[:, -2]


def classifier_outputs(e: Ensemble, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Positive-class probability of every base classifier and whether the
    positive output wins the argmax (negative on ties); both shaped (n, N)."""
    logits = [g.logits(x) for g in e.classifiers]
    probs = np.column_stack([softmax(z)[:, 1] for z in logits])
    wins = np.column_stack([z[:, 1] > z[:, 0] for z in logits])
    return probs, wins


def predict_batch(e: Ensemble, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Labels, confidences and raw per-classifier outputs for a batch."""
    x = np.asarray(x, dtype=np.float64)
    dim = e.classifiers[0].num_inputs
    if x.ndim != 2 or x.shape[1] != dim:
        raise ValueError(f"expected inputs of width {dim}, got shape {x.shape}")
    k = e.num_classes
    if e.strategy == "standard":
        probs = e.classifiers[0].activate_batch(x)
        labels = e.classifiers[0].predict_batch(x)
        return labels, _top_two_gap(probs), probs

    probs, wins = classifier_outputs(e, x)
    if e.strategy == "ova":
        pos_class = np.array([min(t.positives) for t in e.decomposition.tasks])
        best = np.argmax(probs, axis=1)
        # argmax returns the first maximum; map to the lowest class id among equal scores
        labels = pos_class[best]
        if not np.all(np.diff(pos_class) > 0):
            top = probs.max(axis=1, keepdims=True)
            labels = np.where(probs == top, pos_class[None, :], k).min(axis=1)
        return labels, _top_two_gap(probs), probs

    if e.strategy == "ovo":
        win_pos = wins
        votes = np.zeros((len(x), k), dtype=np.int64)
        for j, task in enumerate(e.decomposition.tasks):
            pos, neg = min(task.positives), min(task.negatives)
            votes[:, pos] += win_pos[:, j]
            votes[:, neg] += ~win_pos[:, j]
        labels = np.argmax(votes, axis=1)
        return labels, _top_two_gap(votes).astype(float), votes

    if e.strategy == "ecoc":
        codewords = (probs >= 0.5).astype(np.uint8)
        labels, margins = decode_ecoc_batch(e.decomposition.matrix, codewords)
        return labels, margins.astype(float), codewords
    raise ValueError(f"unknown strategy {e.strategy!r}")


def predict(e: Ensemble, x) -> Prediction:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict takes a single feature vector; use predict_batch for batches")
    labels, conf, raw = predict_batch(e, x[None, :])
    return Prediction(int(labels[0]), float(conf[0]), raw[0])


def accuracy(e: Ensemble, data: Dataset) -> float:
    return float(np.mean(predict_batch(e, data.samples)[0] == data.labels))


def subsample(e: Ensemble, keep: Sequence[int], allow_collisions: bool = False) -> Ensemble:
    """Restrict the ensemble to the classifiers in ``keep`` (in the given order).

    For ECOC the code matrix keeps the matching columns; a reduced matrix with
    repeated rows raises ``CodeError`` unless ``allow_collisions`` is set, in
    which case decoding resolves the collision towards the lowest class id.
    """
    keep = [int(i) for i in keep]
    n = len(e.classifiers)
    if not keep:
        raise ValueError("keep must not be empty")
    if len(set(keep)) != len(keep) or any(not 0 <= i < n for i in keep):
        raise ValueError(f"keep must hold distinct indices in [0, {n})")
    if e.strategy == "standard":
        return e
    dec = e.decomposition.subset(keep)
    if dec.matrix is not None and not allow_collisions and not dec.matrix.has_distinct_rows():
        raise CodeError(f"reduced code with columns {keep} maps two classes to the same codeword")
    traces = [e.training_traces[i] for i in keep] if e.training_traces else []
    return Ensemble(dec, [e.classifiers[i] for i in keep], [e.base_train_accuracy[i] for i in keep], traces)


def training_curve(e: Ensemble, train: Dataset, points: int | None = None) -> list[dict]:
    """Ensemble training accuracy as evolution proceeds, on a shared generation axis.

    Step ``i`` assembles every classifier's best genome after ``i + 1`` of its
    own generations and is plotted at ``(i + 1) * N`` total generations.
    """
    if not e.training_traces:
        raise ValueError("ensemble was trained without traces")
    steps = max(len(t) for t in e.training_traces)
    n = len(e.classifiers)
    idx = range(steps) if points is None else sorted(set(np.linspace(0, steps - 1, points).astype(int).tolist()))
    rows = []
    for i in idx:
        snap = [t.champion_at(i) for t in e.training_traces]
        ens = Ensemble(e.decomposition, snap, [float(g.fitness) for g in snap])
        rows.append({
            "generation": (i + 1) * (1 if e.strategy == "standard" else n),
            "train_accuracy": accuracy(ens, train),
            "mean_base_accuracy": ens.mean_base_accuracy,
        })
    return rows


# archive ----------------------------------------------------------------------


def save_ensemble(e: Ensemble, directory: str | Path, meta: dict | None = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for j, g in enumerate(e.classifiers):
        name = f"classifier_{j:04d}.genome"
        (directory / name).write_text(dumps(g))
        files.append(name)
    if e.decomposition.matrix is not None:
        e.decomposition.matrix.save(directory / "matrix.txt")
    manifest = {
        "format": 1,
        "strategy": e.strategy,
        "k": e.num_classes,
        "tasks": [
            {"positives": sorted(t.positives), "negatives": sorted(t.negatives), "restrict": t.restrict_to_members}
            for t in e.decomposition.tasks
        ],
        "column_origin": (
            list(e.decomposition.matrix.column_origin)
            if e.decomposition.matrix is not None and e.decomposition.matrix.column_origin is not None
            else None
        ),
        "classifiers": files,
        "base_train_accuracy": e.base_train_accuracy,
        **(meta or {}),
    }
    tmp = directory / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    os.replace(tmp, directory / "manifest.json")
    return directory


def load_ensemble(directory: str | Path) -> Ensemble:
    from .binarization import BinaryTask

    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    k = manifest["k"]
    strategy = manifest["strategy"]
    matrix = None
    if (directory / "matrix.txt").exists():
        matrix = EcocMatrix.load(directory / "matrix.txt")
        if manifest.get("column_origin") is not None:
            matrix = EcocMatrix(matrix.bits, tuple(manifest["column_origin"]))
    if strategy == "ecoc" and matrix is not None:
        dec = decompose("ecoc", k, matrix=matrix) if matrix.has_distinct_rows() else None
    else:
        dec = None
    if dec is None:
        tasks = tuple(
            BinaryTask(frozenset(t["positives"]), frozenset(t["negatives"]), t["restrict"]) for t in manifest["tasks"]
        )
        dec = Decomposition(strategy, k, tasks, matrix)
    classifiers = [loads((directory / f).read_text()) for f in manifest["classifiers"]]
    return Ensemble(dec, classifiers, list(manifest["base_train_accuracy"]))
