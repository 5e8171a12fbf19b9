from __future__ import annotations

import csv
import io
import random
from itertools import combinations

import pytest

from rulecover import (
    BinaryDataset,
    DataError,
    MiningConfig,
    NoCandidatesError,
    build_coverage,
    mine_rules,
    score_rule,
)
from synthgen import random_dataset


def coverage_for(ds, antecedents):
    return build_coverage(ds, [score_rule(ds, a) for a in antecedents])


class TestSubsetMatch:
    def setup_method(self):
        self.ds = BinaryDataset(
            ("f1", "f2", "f3", "f4", "f5"),
            ((1, 0, 1, 0, 0), (1, 0, 0, 0, 0)),
            ("1", "0"),
            "1",
        )

    def test_row_with_all_antecedent_features_is_covered(self):
        cov = coverage_for(self.ds, [(0, 2)])
        assert cov.bit(0, 0) == 1

    def test_row_missing_a_feature_is_not_covered(self):
        cov = coverage_for(self.ds, [(0, 2)])
        assert cov.bit(1, 0) == 0


class TestToyCoverage:
    def test_f1_column_has_three_negative_bits(self, toy_ds):
        cov = coverage_for(toy_ds, [(0,)])
        assert cov.neg_cover(0) == 3
        assert cov.pos_cover(0) == 7
        # The three covered negatives are rows 10, 15, 16 of the file.
        covered_negs = [i for i in cov.neg_rows if cov.bit(i, 0)]
        assert covered_negs == [10, 15, 16]


class TestInvariants:
    def test_counts_match_rules_exactly(self):
        rng = random.Random(31)
        for _ in range(15):
            ds = random_dataset(rng, rng.randint(5, 25), rng.randint(2, 6))
            rules = mine_rules(ds, MiningConfig(0.05, 0.0, 3))
            if not rules:
                continue
            cov = build_coverage(ds, rules)
            for k, rule in enumerate(cov.rules):
                assert cov.pos_cover(k) == rule.pos_cover
                assert cov.neg_cover(k) == rule.neg_cover

    def test_rows_partition(self):
        rng = random.Random(32)
        ds = random_dataset(rng, 12, 4)
        cov = coverage_for(ds, [(0,)])
        assert sorted(cov.pos_rows + cov.neg_rows) == list(range(ds.n))
        assert not set(cov.pos_rows) & set(cov.neg_rows)

    def test_column_monotone_under_antecedent_growth(self):
        rng = random.Random(33)
        for _ in range(10):
            ds = random_dataset(rng, rng.randint(6, 20), rng.randint(3, 5))
            pairs = list(combinations(range(ds.m), 2))
            antecedents = [(j,) for j in range(ds.m)] + pairs
            cov = coverage_for(ds, antecedents)
            for k2, pair in enumerate(pairs, start=ds.m):
                for j in pair:
                    wider = cov.columns[j]
                    narrower = cov.columns[k2]
                    assert narrower & ~wider == 0

    def test_rule_order_preserved(self, toy_ds):
        antecedents = [(2,), (0,), (0, 2)]
        cov = coverage_for(toy_ds, antecedents)
        assert [r.antecedent for r in cov.rules] == antecedents


class TestErrors:
    def test_empty_rule_list(self, toy_ds):
        with pytest.raises(NoCandidatesError):
            build_coverage(toy_ds, [])

    def test_foreign_rule_counts_rejected(self, toy_ds):
        rule = score_rule(toy_ds, (0,))
        other = BinaryDataset(
            toy_ds.features,
            toy_ds.rows[:5],
            toy_ds.labels[:5],
            toy_ds.positive_label,
        )
        with pytest.raises(DataError, match="not measured on this dataset"):
            build_coverage(other, [rule])


class TestCsvDump:
    def test_dump_parses_back(self, toy_ds):
        cov = coverage_for(toy_ds, [(0,), (2,)])
        buf = io.StringIO()
        cov.to_csv(buf)
        reader = csv.reader(io.StringIO(buf.getvalue()))
        header = next(reader)
        assert header == ["row", "rule_0", "rule_1"]
        body = list(reader)
        assert len(body) == toy_ds.n
        for record in body:
            i = int(record[0])
            assert [int(c) for c in record[1:]] == [cov.bit(i, 0), cov.bit(i, 1)]
