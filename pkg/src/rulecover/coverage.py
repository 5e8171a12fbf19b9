"""The patient-by-rule coverage matrix shared by the solver and classifier.

Columns are packed row-bitsets so the solver can take unions and population
counts over thousands of coverage queries cheaply. Coverage is materialized
eagerly; at this problem scale (n, p up to ~10^4) it fits in memory easily.
"""

from __future__ import annotations

import csv
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import TextIO

from .dataset import BinaryDataset
from .errors import DataError, NoCandidatesError
from .mining import Rule


@dataclass(frozen=True)
class CoverageMatrix:
    """n x p incidence of rows versus rules, split by class.

    ``columns[k]`` has bit i set iff row i matches every feature of rule
    k's antecedent. Immutable after construction; safe for shared reads.
    """

    n_rows: int
    rules: tuple[Rule, ...]
    columns: tuple[int, ...]
    pos_mask: int
    neg_mask: int

    @property
    def p(self) -> int:
        return len(self.rules)

    def bit(self, row: int, rule: int) -> int:
        return (self.columns[rule] >> row) & 1

    @cached_property
    def pos_rows(self) -> tuple[int, ...]:
        return _indices(self.pos_mask)

    @cached_property
    def neg_rows(self) -> tuple[int, ...]:
        return _indices(self.neg_mask)

    def pos_cover(self, rule: int) -> int:
        return (self.columns[rule] & self.pos_mask).bit_count()

    def neg_cover(self, rule: int) -> int:
        return (self.columns[rule] & self.neg_mask).bit_count()

    def total_cover(self, rule: int) -> int:
        return self.columns[rule].bit_count()

    def to_csv(self, fh: TextIO) -> None:
        """Debug dump: one row per patient, one 0/1 column per rule."""
        writer = csv.writer(fh)
        writer.writerow(["row"] + [f"rule_{k}" for k in range(self.p)])
        for i in range(self.n_rows):
            writer.writerow([i] + [self.bit(i, k) for k in range(self.p)])


def _indices(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def build_coverage(ds: BinaryDataset, rules: Sequence[Rule]) -> CoverageMatrix:
    """Materialize coverage columns for the given rules, order preserved.

    Each rule's stored pos/neg cover is checked against the recomputed
    column; a mismatch means the rules were measured on different data.
    """
    if not rules:
        raise NoCandidatesError("empty rule list; there is nothing to select")
    all_rows = (1 << ds.n) - 1
    columns: list[int] = []
    for k, rule in enumerate(rules):
        mask = all_rows
        for j in rule.antecedent:
            if not 0 <= j < ds.m:
                raise ValueError(f"rule {k}: feature index {j} out of range")
            mask &= ds.feature_masks[j]
        pos_cover = (mask & ds.pos_mask).bit_count()
        neg_cover = (mask & ds.neg_mask).bit_count()
        if pos_cover != rule.pos_cover or neg_cover != rule.neg_cover:
            raise DataError(
                f"rule {k} covers {pos_cover}/{neg_cover} rows here but carries "
                f"counts {rule.pos_cover}/{rule.neg_cover}; it was not measured "
                f"on this dataset"
            )
        columns.append(mask)
    return CoverageMatrix(ds.n, tuple(rules), tuple(columns), ds.pos_mask, ds.neg_mask)
