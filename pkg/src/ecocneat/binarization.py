"""Class binarization: OvO / OvA task lists and ECOC code matrices.

Columns of the exhaustive code are indexed by their position in
:func:`exhaustive_code`; ``EcocMatrix.column_origin`` records those indices so
that classifiers trained once per exhaustive column can be reused to score any
sub-code.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

Strategy = Literal["standard", "ovo", "ova", "ecoc"]
STRATEGIES = ("standard", "ovo", "ova", "ecoc")
# names accepted by classifier_count
COUNT_STRATEGIES = ("standard", "ovo", "ova", "minimal", "mid-length", "exhaustive")

MAX_EXHAUSTIVE_K = 16
RETRY_CAP = 10_000
ENUMERATION_CAP = 5_000_000


class CodeError(ValueError):
    """Invalid code size or code matrix."""


def min_code_size(k: int) -> int:
    """ceil(log2 k), computed exactly."""
    return (k - 1).bit_length()


def max_code_size(k: int) -> int:
    return 2 ** (k - 1) - 1


def mid_length_size(k: int) -> int:
    # ceil(10 log2 k) == ceil(log2 k**10), exact in integers
    return min((k**10 - 1).bit_length(), max_code_size(k))


def check_size(k: int, n: int) -> None:
    lo, hi = min_code_size(k), max_code_size(k)
    if not lo <= n <= hi:
        raise CodeError(f"code size {n} outside [{lo}, {hi}] for k={k} classes")


@dataclass(frozen=True, eq=False)
class EcocMatrix:
    bits: np.ndarray
    column_origin: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        bits = np.array(self.bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise CodeError(f"code matrix must be 2-D, got shape {bits.shape}")
        if np.any(bits > 1):
            raise CodeError("code matrix entries must be 0 or 1")
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)
        if self.column_origin is not None:
            origin = tuple(int(c) for c in self.column_origin)
            if len(origin) != bits.shape[1]:
                raise CodeError("column_origin length must equal the column count")
            object.__setattr__(self, "column_origin", origin)

    @property
    def num_classes(self) -> int:
        return self.bits.shape[0]

    @property
    def num_columns(self) -> int:
        return self.bits.shape[1]

    def __eq__(self, other) -> bool:
        return isinstance(other, EcocMatrix) and np.array_equal(self.bits, other.bits)

    __hash__ = None

    def columns(self, keep: Sequence[int]) -> "EcocMatrix":
        keep = list(keep)
        origin = None if self.column_origin is None else [self.column_origin[j] for j in keep]
        return EcocMatrix(self.bits[:, keep], origin)

    def has_distinct_rows(self) -> bool:
        return _rows_distinct(self.bits)

    def to_text(self) -> str:
        rows = ["".join(str(b) for b in row) for row in self.bits]
        return f"{self.num_classes} {self.num_columns}\n" + "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "EcocMatrix":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise CodeError("empty matrix text")
        try:
            k, n = (int(v) for v in lines[0].split())
        except ValueError:
            raise CodeError(f"bad matrix header {lines[0]!r}; expected 'k N'") from None
        rows = lines[1:]
        if len(rows) != k:
            raise CodeError(f"header says {k} rows, found {len(rows)}")
        for i, row in enumerate(rows):
            if len(row) != n or set(row) - {"0", "1"}:
                raise CodeError(f"row {i}: expected {n} characters over {{0,1}}, got {row!r}")
        return cls(np.array([[int(c) for c in row] for row in rows], dtype=np.uint8))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> "EcocMatrix":
        return cls.from_text(Path(path).read_text())


def _rows_distinct(bits: np.ndarray) -> bool:
    return len({row.tobytes() for row in bits}) == bits.shape[0]


@dataclass(frozen=True)
class BinaryTask:
    positives: frozenset[int]
    negatives: frozenset[int]
    restrict_to_members: bool = False


@dataclass(frozen=True, eq=False)
class Decomposition:
    strategy: Strategy
    num_classes: int
    tasks: tuple[BinaryTask, ...] = ()
    matrix: EcocMatrix | None = None

    @property
    def num_classifiers(self) -> int:
        return max(1, len(self.tasks))

    def subset(self, keep: Sequence[int]) -> "Decomposition":
        keep = list(keep)
        tasks = tuple(self.tasks[j] for j in keep)
        matrix = self.matrix.columns(keep) if self.matrix is not None else None
        return Decomposition(self.strategy, self.num_classes, tasks, matrix)


@dataclass
class CodeQuality:
    code: EcocMatrix
    mean_base_accuracy: float
    tier: Literal["low", "middle", "high"] = "middle"
    index: int = 0


@dataclass
class ValidationReport:
    duplicate_rows: list[tuple[int, int]] = field(default_factory=list)
    duplicate_columns: list[tuple[int, int]] = field(default_factory=list)
    complementary_columns: list[tuple[int, int]] = field(default_factory=list)
    constant_columns: list[int] = field(default_factory=list)
    size_violation: str | None = None

    @property
    def ok(self) -> bool:
        return not (
            self.duplicate_rows
            or self.duplicate_columns
            or self.complementary_columns
            or self.constant_columns
            or self.size_violation
        )

    def messages(self) -> list[str]:
        out = [f"rows {i} and {j} are identical" for i, j in self.duplicate_rows]
        out += [f"columns {i} and {j} are identical" for i, j in self.duplicate_columns]
        out += [f"columns {i} and {j} are complementary" for i, j in self.complementary_columns]
        out += [f"column {j} is constant" for j in self.constant_columns]
        if self.size_violation:
            out.append(self.size_violation)
        return out


def exhaustive_code(k: int) -> EcocMatrix:
    """All 2^(k-1)-1 columns with class 0's bit set to 1, minus the all-ones column.

    Column j (0-based) carries the (k-1)-bit binary encoding of j on classes
    1..k-1, most significant bit on class 1.
    """
    if not 2 <= k <= MAX_EXHAUSTIVE_K:
        raise CodeError(f"exhaustive code supports 2 <= k <= {MAX_EXHAUSTIVE_K}, got {k}")
    n = max_code_size(k)
    j = np.arange(n, dtype=np.int64)
    bits = np.ones((k, n), dtype=np.uint8)
    for c in range(1, k):
        bits[c] = (j >> (k - 1 - c)) & 1
    return EcocMatrix(bits, tuple(range(n)))


def validate(m: EcocMatrix) -> ValidationReport:
    bits = m.bits
    k, n = bits.shape
    rep = ValidationReport()
    seen: dict[bytes, int] = {}
    for i, row in enumerate(bits):
        key = row.tobytes()
        if key in seen:
            rep.duplicate_rows.append((seen[key], i))
        else:
            seen[key] = i
    cols = [bits[:, j] for j in range(n)]
    for j, col in enumerate(cols):
        if col.min() == col.max():
            rep.constant_columns.append(j)
    for a, b in itertools.combinations(range(n), 2):
        if np.array_equal(cols[a], cols[b]):
            rep.duplicate_columns.append((a, b))
        elif np.array_equal(cols[a], 1 - cols[b]):
            rep.complementary_columns.append((a, b))
    if k < 2:
        rep.size_violation = f"need at least 2 classes, got {k}"
    elif not min_code_size(k) <= n <= max_code_size(k):
        rep.size_violation = f"size {n} outside [{min_code_size(k)}, {max_code_size(k)}] for k={k}"
    return rep


def code_of_size(k: int, n: int, rng: np.random.Generator, retry_cap: int = RETRY_CAP) -> EcocMatrix:
    """Uniformly sample ``n`` distinct exhaustive-code columns until the rows are distinct."""
    check_size(k, n)
    full = exhaustive_code(k)
    total = full.num_columns
    for _ in range(retry_cap):
        cols = np.sort(rng.choice(total, size=n, replace=False))
        if _rows_distinct(full.bits[:, cols]):
            return full.columns(cols.tolist())
    raise CodeError(
        f"no valid {n}-column code for k={k} after {retry_cap} draws "
        f"(valid fraction may be tiny; try a larger size)"
    )


def classifier_count(strategy: str, k: int) -> int:
    if k < 2:
        raise ValueError("k must be >= 2")
    if strategy == "standard":
        return 1
    if strategy == "ovo":
        return k * (k - 1) // 2
    if strategy == "ova":
        return k
    if strategy == "minimal":
        return min_code_size(k)
    if strategy == "mid-length":
        return mid_length_size(k)
    if strategy == "exhaustive":
        return max_code_size(k)
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {COUNT_STRATEGIES}")


def ecoc_size(k: int, bits: int | str | None) -> int:
    """Resolve a code size given as an integer or as minimal / mid-length / exhaustive."""
    if bits is None or bits == "exhaustive":
        return max_code_size(k)
    if bits == "minimal":
        return min_code_size(k)
    if bits == "mid-length":
        return mid_length_size(k)
    n = int(bits)
    check_size(k, n)
    return n


def decompose(
    strategy: str,
    k: int,
    n: int | str | None = None,
    rng: np.random.Generator | None = None,
    matrix: EcocMatrix | None = None,
) -> Decomposition:
    if k < 2:
        raise ValueError("k must be >= 2")
    if strategy != "ecoc" and (n is not None or matrix is not None):
        raise ValueError(f"a code size/matrix only applies to ecoc, not {strategy!r}")
    classes = frozenset(range(k))
    if strategy == "standard":
        return Decomposition("standard", k)
    if strategy == "ovo":
        tasks = tuple(
            BinaryTask(frozenset({i}), frozenset({j}), True) for i, j in itertools.combinations(range(k), 2)
        )
        return Decomposition("ovo", k, tasks)
    if strategy == "ova":
        tasks = tuple(BinaryTask(frozenset({i}), classes - {i}) for i in range(k))
        return Decomposition("ova", k, tasks)
    if strategy == "ecoc":
        if matrix is None:
            size = ecoc_size(k, n)
            if size == max_code_size(k):
                matrix = exhaustive_code(k)
            else:
                if rng is None:
                    raise ValueError("a random generator is required to sample a code of explicit size")
                matrix = code_of_size(k, size, rng)
        if matrix.num_classes != k:
            raise CodeError(f"matrix has {matrix.num_classes} rows but k={k}")
        report = validate(matrix)
        if not report.ok:
            raise CodeError("invalid code matrix: " + "; ".join(report.messages()))
        tasks = []
        for j in range(matrix.num_columns):
            col = matrix.bits[:, j]
            pos = frozenset(int(c) for c in np.flatnonzero(col == 1))
            tasks.append(BinaryTask(pos, classes - pos))
        return Decomposition("ecoc", k, tuple(tasks), matrix)
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def count_valid_subsets(k: int, n: int, cap: int = ENUMERATION_CAP) -> int:
    """Number of n-column subsets of the exhaustive code whose rows are all distinct."""
    check_size(k, n)
    total = max_code_size(k)
    combos = math.comb(total, n)
    if combos > cap:
        raise CodeError(f"C({total}, {n}) = {combos} subsets exceeds the enumeration cap {cap}")
    # each column as a k-bit integer per row; rows are distinct iff the n-bit row codes are
    bits = exhaustive_code(k).bits.astype(np.int64)
    count = 0
    for cols in itertools.combinations(range(total), n):
        codes = np.zeros(k, dtype=np.int64)
        for c in cols:
            codes = (codes << 1) | bits[:, c]
        if len(set(codes.tolist())) == k:
            count += 1
    return count


def valid_subsets(k: int, n: int, cap: int = ENUMERATION_CAP) -> list[tuple[int, ...]]:
    """All n-column subsets (as exhaustive-column indices) with distinct rows."""
    check_size(k, n)
    total = max_code_size(k)
    if math.comb(total, n) > cap:
        raise CodeError(f"C({total}, {n}) subsets exceeds the enumeration cap {cap}")
    bits = exhaustive_code(k).bits
    return [cols for cols in itertools.combinations(range(total), n) if _rows_distinct(bits[:, cols])]


def rank_codes(candidates: Sequence[EcocMatrix], column_accuracy: dict[int, float]) -> list[CodeQuality]:
    """Score each candidate by the mean accuracy of its columns' classifiers and
    split the sorted pool 10/80/10 into high / middle / low tiers."""
    scored = []
    for idx, code in enumerate(candidates):
        if code.column_origin is None:
            raise ValueError(f"candidate {idx} lacks column_origin")
        missing = [c for c in code.column_origin if c not in column_accuracy]
        if missing:
            raise KeyError(f"candidate {idx}: no accuracy for exhaustive columns {missing}")
        mean = float(np.mean([column_accuracy[c] for c in code.column_origin]))
        scored.append(CodeQuality(code, mean, index=idx))
    scored.sort(key=lambda q: (-q.mean_base_accuracy, q.index))
    n = len(scored)
    n_high = max(1, n // 10) if n else 0
    n_low = n // 10 if n - n_high >= n // 10 else 0
    for pos, q in enumerate(scored):
        if pos < n_high:
            q.tier = "high"
        elif pos >= n - n_low:
            q.tier = "low"
        else:
            q.tier = "middle"
    return scored
