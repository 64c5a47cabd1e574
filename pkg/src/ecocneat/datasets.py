"""Tabular classification datasets: loading, class subsets, stratified splits
and binary relabelled views used to train base classifiers."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Literal, Sequence

import numpy as np


class DataError(ValueError):
    """Malformed or unusable input data."""


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...] = ()
    num_classes: int = 0

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=np.float64, order="F")
        labels = np.array(self.labels, dtype=np.int64)
        if samples.ndim != 2:
            raise DataError(f"samples must be 2-D, got shape {samples.shape}")
        if labels.shape != (samples.shape[0],):
            raise DataError("labels must have one entry per sample row")
        if not np.all(np.isfinite(samples)):
            raise DataError("samples contain NaN or infinite values")
        k = self.num_classes or (int(labels.max()) + 1 if labels.size else 0)
        if k < 2:
            raise DataError("a dataset needs at least two classes")
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise DataError(f"labels must lie in [0, {k})")
        counts = np.bincount(labels, minlength=k)
        if np.any(counts == 0):
            missing = np.flatnonzero(counts == 0).tolist()
            raise DataError(f"no samples for class ids {missing}")
        names = tuple(self.class_names) or tuple(str(c) for c in range(k))
        if len(names) != k:
            raise DataError(f"expected {k} class names, got {len(names)}")
        samples.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "num_classes", k)

    @property
    def feature_dim(self) -> int:
        return self.samples.shape[1]

    def __len__(self) -> int:
        return self.samples.shape[0]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    def take(self, index: np.ndarray) -> "Dataset":
        """Row subset that keeps the class-id space (every class must remain present)."""
        return Dataset(self.samples[index], self.labels[index], self.class_names, self.num_classes)

    def minmax_scaled(self) -> "Dataset":
        lo = self.samples.min(axis=0)
        span = self.samples.max(axis=0) - lo
        span[span == 0] = 1.0
        return Dataset((self.samples - lo) / span, self.labels, self.class_names, self.num_classes)


@dataclass(frozen=True, eq=False)
class BinaryView:
    base: Dataset
    positive_labels: frozenset[int]
    negative_labels: frozenset[int]
    included_only: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(samples, labels) with label 1 for positives and 0 for negatives."""
        if "arrays" not in self._cache:
            labels = self.base.labels
            pos = np.isin(labels, sorted(self.positive_labels))
            neg = np.isin(labels, sorted(self.negative_labels))
            if self.included_only:
                keep = pos | neg
                x = np.asfortranarray(self.base.samples[keep])
                y = pos[keep].astype(np.int64)
            else:
                x = self.base.samples
                y = pos.astype(np.int64)
            x.flags.writeable = False
            y.flags.writeable = False
            self._cache["arrays"] = (x, y)
        return self._cache["arrays"]

    @property
    def num_classes(self) -> int:
        return 2

    @property
    def feature_dim(self) -> int:
        return self.base.feature_dim

    def __len__(self) -> int:
        return len(self.arrays()[1])

    def __iter__(self) -> Iterator[tuple[np.ndarray, int]]:
        x, y = self.arrays()
        for row, label in zip(x, y):
            yield row, int(label)


@dataclass(frozen=True)
class SplitPlan:
    kind: Literal["holdout", "kfold"] = "holdout"
    fold_count: int = 10
    test_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("holdout", "kfold"):
            raise ValueError(f"unknown split kind {self.kind!r}")
        if self.kind == "kfold" and self.fold_count < 2:
            raise ValueError("fold_count must be >= 2")
        if self.kind == "holdout" and not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")


def as_arrays(data: Dataset | BinaryView) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, BinaryView):
        return data.arrays()
    return data.samples, data.labels


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _reindex(raw_labels: Sequence[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    mapping: dict[str, int] = {}
    for lab in raw_labels:
        mapping.setdefault(lab, len(mapping))
    if len(mapping) < 2:
        raise DataError(f"only one class present ({next(iter(mapping), '')!r}); need at least two")
    return np.array([mapping[lab] for lab in raw_labels], dtype=np.int64), tuple(mapping)


def _build(rows: list[list[str]], label_col: int, first_line: int, path: Path) -> Dataset:
    width = len(rows[0])
    features, raw_labels = [], []
    for r, row in enumerate(rows):
        line = first_line + r
        if len(row) != width:
            raise DataError(f"{path}:{line}: ragged row with {len(row)} cells, expected {width}")
        vals = []
        for c, cell in enumerate(row):
            if c == label_col:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}:{line}: column {c}: cannot parse {cell!r} as a number") from None
            if not math.isfinite(v):
                raise DataError(f"{path}:{line}: column {c}: non-finite value {cell!r}")
            vals.append(v)
        features.append(vals)
        raw_labels.append(row[label_col].strip())
    labels, names = _reindex(raw_labels)
    return Dataset(np.array(features, dtype=np.float64), labels, names)


def load_csv(path: str | Path, label_column: int | str = -1) -> Dataset:
    """Load a comma-separated file; the header row is optional and auto-detected.

    A header is assumed iff the first row holds a non-numeric cell outside the
    label column. Labels are re-indexed densely in first-appearance order and the
    original tokens are kept as ``class_names``.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = [[cell.strip() for cell in row] for row in csv.reader(fh) if any(c.strip() for c in row)]
    if not rows:
        raise DataError(f"{path}: empty file")
    width = len(rows[0])

    def resolve(header: list[str] | None) -> int:
        if isinstance(label_column, str):
            if header is None or label_column not in header:
                raise DataError(f"{path}: label column {label_column!r} not found in header")
            return header.index(label_column)
        idx = label_column if label_column >= 0 else width + label_column
        if not 0 <= idx < width:
            raise DataError(f"{path}: label column {label_column} out of range for {width} columns")
        return idx

    first = rows[0]
    if isinstance(label_column, str):
        has_header = True
    else:
        col = resolve(None)
        has_header = any(not _is_number(c) for i, c in enumerate(first) if i != col)
    header = first if has_header else None
    col = resolve(header)
    body = rows[1:] if has_header else rows
    if not body:
        raise DataError(f"{path}: no data rows")
    return _build(body, col, 2 if has_header else 1, path)


def load_whitespace(path: str | Path, skip_first: bool = False) -> Dataset:
    """Whitespace-delimited table with the class label in the last column."""
    path = Path(path)
    rows = [line.split() for line in Path(path).read_text().splitlines() if line.strip()]
    if not rows:
        raise DataError(f"{path}: empty file")
    if skip_first:
        rows = [r[1:] for r in rows]
    return _build(rows, len(rows[0]) - 1, 1, path)


ECOLI_FEATURES = 7


def ingest_uci_ecoli(path: str | Path) -> Dataset:
    """Parse the UCI ``ecoli.data`` layout: sequence name, 7 features, class name."""
    path = Path(path)
    rows = [line.split() for line in path.read_text().splitlines() if line.strip()]
    if not rows:
        raise DataError(f"{path}: empty file")
    for i, row in enumerate(rows, start=1):
        if len(row) != ECOLI_FEATURES + 2:
            raise DataError(
                f"{path}:{i}: expected {ECOLI_FEATURES + 2} whitespace-separated fields "
                f"(name, {ECOLI_FEATURES} features, class), got {len(row)}"
            )
        if _is_number(row[0]) or _is_number(row[-1]):
            raise DataError(f"{path}:{i}: unknown layout; first and last fields must be names")
    return _build([r[1:] for r in rows], ECOLI_FEATURES, 1, path)


def load_sklearn_digits() -> Dataset:
    """The 8x8 handwritten digits set bundled with scikit-learn (1797 x 64, 10 classes)."""
    from sklearn.datasets import load_digits

    bunch = load_digits()
    labels, names = _reindex([str(v) for v in bunch.target])
    return Dataset(bunch.data, labels, names)


def class_subset(d: Dataset, keep: Sequence[int]) -> Dataset:
    keep = [int(c) for c in keep]
    if len(keep) < 2:
        raise DataError("keep must list at least two class ids")
    if len(set(keep)) != len(keep):
        raise DataError(f"duplicate class ids in keep: {keep}")
    bad = [c for c in keep if not 0 <= c < d.num_classes]
    if bad:
        raise DataError(f"unknown class ids {bad} (dataset has {d.num_classes} classes)")
    if keep == list(range(d.num_classes)):
        return d
    remap = np.full(d.num_classes, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    mask = remap[d.labels] >= 0
    return Dataset(
        d.samples[mask],
        remap[d.labels[mask]],
        tuple(d.class_names[c] for c in keep),
        len(keep),
    )


def _largest_remainder(quotas: np.ndarray, total: int) -> np.ndarray:
    base = np.floor(quotas).astype(np.int64)
    short = total - int(base.sum())
    if short > 0:
        # stable sort keeps lower indices first among equal remainders
        order = np.argsort(-(quotas - base), kind="stable")
        base[order[:short]] += 1
    return base


def split(d: Dataset, plan: SplitPlan) -> list[tuple[Dataset, Dataset]]:
    """Stratified holdout or k-fold split, deterministic in ``plan.seed``."""
    rng = np.random.default_rng(plan.seed)
    counts = d.class_counts()
    per_class = [rng.permutation(np.flatnonzero(d.labels == c)) for c in range(d.num_classes)]

    if plan.kind == "kfold":
        small = [c for c in range(d.num_classes) if counts[c] < plan.fold_count]
        if small:
            raise DataError(
                f"classes {small} have fewer than {plan.fold_count} samples; cannot build stratified folds"
            )
        fold_of = np.empty(len(d), dtype=np.int64)
        # deal class-grouped samples round-robin so fold sizes and per-class counts differ by <= 1
        order = np.concatenate(per_class)
        fold_of[order] = np.arange(len(order)) % plan.fold_count
        pairs = []
        for f in range(plan.fold_count):
            test_idx = np.flatnonzero(fold_of == f)
            train_idx = np.flatnonzero(fold_of != f)
            pairs.append((d.take(train_idx), d.take(test_idx)))
        return pairs

    n_test = int(round(plan.test_fraction * len(d)))
    n_test = min(max(n_test, d.num_classes), len(d) - d.num_classes)
    test_counts = _largest_remainder(counts * (n_test / len(d)), n_test)
    test_counts = np.clip(test_counts, 1, counts - 1)
    test_idx = np.sort(np.concatenate([idx[:m] for idx, m in zip(per_class, test_counts)]))
    train_mask = np.ones(len(d), dtype=bool)
    train_mask[test_idx] = False
    return [(d.take(np.flatnonzero(train_mask)), d.take(test_idx))]


def binary_view(d: Dataset, positives, negatives, included_only: bool = False) -> BinaryView:
    pos, neg = frozenset(int(c) for c in positives), frozenset(int(c) for c in negatives)
    if not pos or not neg:
        raise DataError("positive and negative label sets must both be non-empty")
    if pos & neg:
        raise DataError(f"positive and negative sets overlap on {sorted(pos & neg)}")
    out = [c for c in pos | neg if not 0 <= c < d.num_classes]
    if out:
        raise DataError(f"class ids {sorted(out)} out of range [0, {d.num_classes})")
    return BinaryView(d, pos, neg, included_only)
