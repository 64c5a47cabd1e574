"""Evaluation quantities: confusion matrices, precision/recall/F1 with micro,
macro and weighted averages, accuracy-rejection curves and network complexity."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np


@dataclass
class ConfusionMatrix:
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_labels(cls, preds, truth, k: int) -> "ConfusionMatrix":
        counts = np.zeros((k, k), dtype=np.int64)
        np.add.at(counts, (np.asarray(truth), np.asarray(preds)), 1)
        return cls(counts)


@dataclass
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass
class ScoreReport:
    per_class: list[PRF]
    micro: PRF
    macro: PRF
    weighted: PRF
    accuracy: float
    correct: int
    total: int
    support: list[int]
    confusion: ConfusionMatrix
    # classes whose precision / recall denominator was zero (reported as 0)
    undefined_precision: list[int] = field(default_factory=list)
    undefined_recall: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "correct": self.correct,
            "total": self.total,
            "per_class": [asdict(p) for p in self.per_class],
            "support": self.support,
            "micro": asdict(self.micro),
            "macro": asdict(self.macro),
            "weighted": asdict(self.weighted),
            "confusion": self.confusion.counts.tolist(),
            "undefined_precision": self.undefined_precision,
            "undefined_recall": self.undefined_recall,
        }

    def to_csv(self, class_names: Sequence[str] | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "precision", "recall", "f1", "support"])
        for c, p in enumerate(self.per_class):
            name = class_names[c] if class_names else str(c)
            w.writerow([name, p.precision, p.recall, p.f1, self.support[c]])
        for label, p in (("micro", self.micro), ("macro", self.macro), ("weighted", self.weighted)):
            w.writerow([label, p.precision, p.recall, p.f1, self.total])
        return buf.getvalue()


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def score(preds: Sequence[int], truth: Sequence[int], k: int) -> ScoreReport:
    preds, truth = np.asarray(preds, dtype=np.int64), np.asarray(truth, dtype=np.int64)
    if preds.shape != truth.shape:
        raise ValueError(f"length mismatch: {preds.shape} predictions vs {truth.shape} labels")
    if preds.size == 0:
        raise ValueError("cannot score an empty prediction list")
    for name, arr in (("prediction", preds), ("label", truth)):
        if arr.min() < 0 or arr.max() >= k:
            raise ValueError(f"{name} outside [0, {k})")
    cm = ConfusionMatrix.from_labels(preds, truth, k)
    tp = np.diag(cm.counts).astype(float)
    pred_count = cm.counts.sum(axis=0)
    support = cm.counts.sum(axis=1)
    per_class, undef_p, undef_r = [], [], []
    for c in range(k):
        if pred_count[c] == 0:
            undef_p.append(c)
        if support[c] == 0:
            undef_r.append(c)
        p = tp[c] / pred_count[c] if pred_count[c] else 0.0
        r = tp[c] / support[c] if support[c] else 0.0
        per_class.append(PRF(p, r, _f1(p, r)))
    n = int(preds.size)
    correct = int(tp.sum())
    pooled_tp = tp.sum()
    pooled_fp = float((pred_count - tp).sum())
    pooled_fn = float((support - tp).sum())
    micro_p = pooled_tp / (pooled_tp + pooled_fp) if pooled_tp + pooled_fp else 0.0
    micro_r = pooled_tp / (pooled_tp + pooled_fn) if pooled_tp + pooled_fn else 0.0
    micro = PRF(float(micro_p), float(micro_r), _f1(micro_p, micro_r))
    macro = PRF(*(float(np.mean([getattr(p, a) for p in per_class])) for a in ("precision", "recall", "f1")))
    wts = support / n
    weighted = PRF(*(float(np.dot(wts, [getattr(p, a) for p in per_class])) for a in ("precision", "recall", "f1")))
    return ScoreReport(
        per_class, micro, macro, weighted, correct / n, correct, n, support.tolist(), cm, undef_p, undef_r
    )


@dataclass
class RejectionCurve:
    points: list[tuple[float, float]]


def rejection_curve(predictions, truth: Sequence[int], grid: Sequence[float]) -> RejectionCurve:
    """Accuracy-rejection curve for a list of ``Prediction`` objects."""
    if len(predictions) != len(truth):
        raise ValueError("predictions and truth differ in length")
    conf = [p.confidence for p in predictions]
    ok = [p.label == t for p, t in zip(predictions, truth)]
    return rejection_curve_arrays(conf, ok, grid)


def rejection_curve_arrays(confidences: Sequence[float], correct: Sequence[bool], grid: Sequence[float]) -> RejectionCurve:
    """Accuracy on the most confident ``ceil((1 - r) * n)`` samples for each rejection rate ``r``."""
    conf = np.asarray(confidences, dtype=float)
    ok = np.asarray(correct, dtype=bool)
    if conf.shape != ok.shape or conf.size == 0:
        raise ValueError("confidences and correctness flags must be equal-length and non-empty")
    order = np.argsort(-conf, kind="stable")
    hits = np.cumsum(ok[order])
    n = conf.size
    points = []
    for r in grid:
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"rejection rate {r} outside [0, 1]")
        # subtract a hair so (1 - 0.9) * 10 keeps exactly one sample
        kept = max(1, math.ceil((1.0 - r) * n - 1e-9))
        points.append((float(r), float(hits[kept - 1]) / kept))
    return RejectionCurve(points)


@dataclass
class ComplexityReport:
    per_classifier: list[tuple[int, int]]
    per_classifier_no_inputs: list[int]

    @property
    def total_nodes(self) -> int:
        return sum(n for n, _ in self.per_classifier)

    @property
    def total_connections(self) -> int:
        return sum(c for _, c in self.per_classifier)

    @property
    def total_nodes_no_inputs(self) -> int:
        return sum(self.per_classifier_no_inputs)

    @property
    def mean_nodes(self) -> float:
        return self.total_nodes / len(self.per_classifier)

    @property
    def mean_connections(self) -> float:
        return self.total_connections / len(self.per_classifier)

    @property
    def mean_nodes_no_inputs(self) -> float:
        return self.total_nodes_no_inputs / len(self.per_classifier)

    def to_dict(self) -> dict:
        return {
            "classifiers": len(self.per_classifier),
            "total_nodes": self.total_nodes,
            "total_nodes_excluding_inputs": self.total_nodes_no_inputs,
            "total_connections": self.total_connections,
            "mean_nodes": self.mean_nodes,
            "mean_nodes_excluding_inputs": self.mean_nodes_no_inputs,
            "mean_connections": self.mean_connections,
        }


def complexity(genomes) -> ComplexityReport:
    """Node and enabled-connection counts; accepts an Ensemble or a list of genomes."""
    genomes = getattr(genomes, "classifiers", genomes)
    return ComplexityReport(
        [(g.num_nodes(include_inputs=True), g.num_enabled()) for g in genomes],
        [g.num_nodes(include_inputs=False) for g in genomes],
    )


def repetition_stats(values: Sequence[float]) -> tuple[float, float]:
    """Mean and population variance."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one value")
    return float(arr.mean()), float(arr.var())


def mean_ci(values: Sequence[float], z: float = 1.96) -> tuple[float, float, float]:
    """Mean with a normal-approximation 95% interval (zero width for one value)."""
    arr = np.asarray(values, dtype=float)
    m = float(arr.mean())
    if arr.size < 2:
        return m, m, m
    half = z * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return m, m - half, m + half
