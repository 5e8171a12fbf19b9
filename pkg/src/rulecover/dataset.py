"""Binary feature matrices with class labels, CSV ingestion, and seeded folds."""

from __future__ import annotations

import csv
import json
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import TextIO

from .errors import DataError

# Fold shuffles use CPython's random.Random (MT19937 with Fisher-Yates
# shuffle). The identifier is echoed into every report so a run can be
# reproduced from its config alone.
FOLD_RNG_ALGORITHM = "mt19937-fisher-yates"


@dataclass(frozen=True)
class BinaryDataset:
    """An n x m matrix of 0/1 cells with one class label per row.

    Rows are observations (patients), columns are named binary features.
    A row belongs to the positive class iff its label equals
    ``positive_label``; any other label value counts as negative.
    Instances are immutable and safe to share across workers.
    """

    features: tuple[str, ...]
    rows: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...]
    positive_label: str

    def __post_init__(self) -> None:
        if not self.features:
            raise DataError("dataset has no feature columns")
        if not self.rows:
            raise DataError("dataset has no rows")
        seen: set[str] = set()
        for name in self.features:
            if not name:
                raise DataError("feature names must be non-empty")
            if name in seen:
                raise DataError(f"duplicate feature name {name!r}")
            seen.add(name)
        if len(self.labels) != len(self.rows):
            raise DataError("label count does not match row count")
        m = len(self.features)
        for i, row in enumerate(self.rows):
            if len(row) != m:
                raise DataError(f"row {i} has {len(row)} cells, expected {m}")
            for j, cell in enumerate(row):
                if cell not in (0, 1):
                    raise DataError(
                        f"row {i}, column {self.features[j]!r}: "
                        f"{cell!r} is not 0 or 1"
                    )

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def m(self) -> int:
        return len(self.features)

    @cached_property
    def positives(self) -> tuple[bool, ...]:
        return tuple(lab == self.positive_label for lab in self.labels)

    @property
    def n_pos(self) -> int:
        return self.pos_mask.bit_count()

    @property
    def n_neg(self) -> int:
        return self.n - self.n_pos

    @cached_property
    def pos_mask(self) -> int:
        """Bitmask over rows: bit i is set iff row i is positive."""
        mask = 0
        for i, flag in enumerate(self.positives):
            if flag:
                mask |= 1 << i
        return mask

    @cached_property
    def neg_mask(self) -> int:
        return ((1 << self.n) - 1) ^ self.pos_mask

    @cached_property
    def feature_masks(self) -> tuple[int, ...]:
        """Per-feature bitmask over rows: bit i of mask j iff rows[i][j] == 1."""
        masks = [0] * self.m
        for i, row in enumerate(self.rows):
            bit = 1 << i
            for j, cell in enumerate(row):
                if cell:
                    masks[j] |= bit
        return tuple(masks)

    def subset(self, indices: Sequence[int]) -> BinaryDataset:
        """A physically separate dataset holding only the given rows, in order."""
        rows = tuple(self.rows[i] for i in indices)
        labels = tuple(self.labels[i] for i in indices)
        return BinaryDataset(self.features, rows, labels, self.positive_label)

    def to_csv(self, fh: TextIO, label_column: str = "class") -> None:
        if label_column in self.features:
            raise DataError(f"label column {label_column!r} collides with a feature")
        writer = csv.writer(fh)
        writer.writerow(list(self.features) + [label_column])
        for row, label in zip(self.rows, self.labels):
            writer.writerow(list(row) + [label])


def load_csv(path: str | Path, label_column: str, positive_label: str) -> BinaryDataset:
    """Load a header-row CSV whose non-label cells are all 0 or 1.

    The label column is removed from the feature set; column order is
    otherwise preserved. Cells are stripped of surrounding whitespace but
    must then be exactly "0" or "1".
    """
    p = Path(path)
    if not p.exists():
        raise DataError(f"data file not found: {p}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError(f"{p}: missing header row")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{p}: label column {label_column!r} not found in header")
        label_idx = header.index(label_column)
        features = tuple(h for i, h in enumerate(header) if i != label_idx)
        rows: list[tuple[int, ...]] = []
        labels: list[str] = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise DataError(
                    f"{p}, line {lineno}: expected {len(header)} cells, got {len(record)}"
                )
            cells: list[int] = []
            for i, raw in enumerate(record):
                if i == label_idx:
                    continue
                cell = raw.strip()
                if cell == "0":
                    cells.append(0)
                elif cell == "1":
                    cells.append(1)
                else:
                    raise DataError(
                        f"{p}, line {lineno}, column {header[i]!r}: "
                        f"{raw!r} is not 0 or 1"
                    )
            rows.append(tuple(cells))
            labels.append(record[label_idx].strip())
    if not rows:
        raise DataError(f"{p}: no data rows")
    ds = BinaryDataset(features, tuple(rows), tuple(labels), positive_label)
    if ds.n_pos == 0:
        raise DataError(
            f"{p}: no row has label {positive_label!r}; the positive class is empty"
        )
    return ds


def drop_constant_features(ds: BinaryDataset) -> tuple[BinaryDataset, list[str]]:
    """Remove columns that are all-zero or all-one over the whole dataset.

    Returns the reduced dataset and the dropped names in original column
    order. Raises DataError when every column is constant.
    """
    keep: list[int] = []
    dropped: list[str] = []
    for j, mask in enumerate(ds.feature_masks):
        count = mask.bit_count()
        if 0 < count < ds.n:
            keep.append(j)
        else:
            dropped.append(ds.features[j])
    if not keep:
        raise DataError("every feature is constant; nothing left to mine")
    if not dropped:
        return ds, []
    features = tuple(ds.features[j] for j in keep)
    rows = tuple(tuple(row[j] for j in keep) for row in ds.rows)
    return BinaryDataset(features, rows, ds.labels, ds.positive_label), dropped


@dataclass(frozen=True)
class FoldPlan:
    """Stratified fold assignments for repeated k-fold cross validation.

    ``assignments[r][i]`` is the fold index of row i in repeat r. Within a
    repeat the folds partition all rows, and per-class counts per fold
    differ from the proportional ideal by at most one.
    """

    repeats: int
    folds: int
    seed: int
    algorithm: str
    assignments: tuple[tuple[int, ...], ...]

    def test_rows(self, repeat: int, fold: int) -> tuple[int, ...]:
        assign = self.assignments[repeat]
        return tuple(i for i, f in enumerate(assign) if f == fold)

    def train_rows(self, repeat: int, fold: int) -> tuple[int, ...]:
        assign = self.assignments[repeat]
        return tuple(i for i, f in enumerate(assign) if f != fold)

    def iter_splits(self) -> Iterable[tuple[int, int, tuple[int, ...], tuple[int, ...]]]:
        """Yield (repeat, fold, train_rows, test_rows) in deterministic order."""
        for r in range(self.repeats):
            for f in range(self.folds):
                yield r, f, self.train_rows(r, f), self.test_rows(r, f)

    def to_json(self) -> str:
        doc = {
            "repeats": self.repeats,
            "folds": self.folds,
            "seed": self.seed,
            "algorithm": self.algorithm,
            "assignments": [list(a) for a in self.assignments],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def make_folds(ds: BinaryDataset, repeats: int, folds: int, seed: int) -> FoldPlan:
    """Build a deterministic stratified fold plan for ``repeats`` x ``folds`` CV.

    Each repeat shuffles the positive and negative rows independently and
    deals them round-robin with a single continuing cursor, so every fold
    is non-empty whenever n >= folds and class counts stay balanced.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if folds > ds.n:
        raise DataError(f"cannot split {ds.n} rows into {folds} folds")
    rng = random.Random(seed)
    pos = [i for i, flag in enumerate(ds.positives) if flag]
    neg = [i for i, flag in enumerate(ds.positives) if not flag]
    assignments: list[tuple[int, ...]] = []
    for _ in range(repeats):
        order_pos = list(pos)
        order_neg = list(neg)
        rng.shuffle(order_pos)
        rng.shuffle(order_neg)
        assign = [0] * ds.n
        cursor = 0
        for i in order_pos:
            assign[i] = cursor % folds
            cursor += 1
        for i in order_neg:
            assign[i] = cursor % folds
            cursor += 1
        assignments.append(tuple(assign))
    return FoldPlan(repeats, folds, seed, FOLD_RNG_ALGORITHM, tuple(assignments))
