"""Class-association rule mining for the positive class.

Candidates are generated level-wise over the itemset lattice (Apriori) and
pruned by the anti-monotone support bound: a superset antecedent can never
cover more rows than any of its subsets. Confidence and negative coverage
are always measured against the full dataset, since confidence is undefined
on the positive rows alone.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

from .dataset import BinaryDataset
from .errors import DataError

SUPPORT_JOINT = "joint"
SUPPORT_ANTECEDENT = "antecedent"

# Slack for >=-threshold comparisons on ratios, so boundary cases like
# confidence exactly equal to the minimum pass despite float rounding.
EPS = 1e-9


@dataclass(frozen=True)
class MiningConfig:
    """Thresholds for rule generation.

    ``support_semantics`` selects what the support threshold measures:
    "joint" counts only positive rows matching the antecedent (the form
    used in reported rule tables), "antecedent" counts matching rows of
    both classes (the form the selection model re-validates).
    """

    min_support: float = 0.01
    min_confidence: float = 0.7
    max_len: int = 4
    support_semantics: str = SUPPORT_JOINT

    def __post_init__(self) -> None:
        if not 0.0 <= self.min_support <= 1.0:
            raise ValueError("min_support must be in [0, 1]")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError("min_confidence must be in [0, 1]")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.support_semantics not in (SUPPORT_JOINT, SUPPORT_ANTECEDENT):
            raise ValueError(f"unknown support semantics {self.support_semantics!r}")


@dataclass(frozen=True)
class Rule:
    """An antecedent feature set implying the positive class.

    ``support`` is always the joint form pos_cover/n. The antecedent form
    (pos_cover + neg_cover)/n is used only as a mining threshold and is
    re-derived from coverage counts where the selection model needs it.
    """

    antecedent: tuple[int, ...]
    support: float
    confidence: float
    lift: float
    pos_cover: int
    neg_cover: int

    def to_dict(self, features: tuple[str, ...]) -> dict:
        return {
            "features": [features[j] for j in self.antecedent],
            "support": self.support,
            "confidence": self.confidence,
            "lift": self.lift,
            "pos_cover": self.pos_cover,
            "neg_cover": self.neg_cover,
        }

    @staticmethod
    def from_dict(doc: dict, features: tuple[str, ...]) -> Rule:
        index = {name: j for j, name in enumerate(features)}
        try:
            antecedent = tuple(sorted({index[name] for name in doc["features"]}))
        except KeyError as exc:
            raise DataError(f"rule references unknown feature {exc.args[0]!r}") from None
        return Rule(
            antecedent=antecedent,
            support=float(doc["support"]),
            confidence=float(doc["confidence"]),
            lift=float(doc["lift"]),
            pos_cover=int(doc["pos_cover"]),
            neg_cover=int(doc["neg_cover"]),
        )


def _metrics(pos_cover: int, neg_cover: int, n: int, n_pos: int) -> tuple[float, float, float]:
    total = pos_cover + neg_cover
    confidence = pos_cover / total if total else 0.0
    base = n_pos / n
    lift = confidence / base if base else 0.0
    return pos_cover / n, confidence, lift


def score_rule(ds: BinaryDataset, antecedent: Iterable[int]) -> Rule:
    """Measure one antecedent against the dataset by exact subset match.

    A row is covered when it has a 1 in every antecedent position. With
    zero total coverage, confidence and lift are both defined as 0.
    """
    idx = tuple(sorted(set(antecedent)))
    if not idx:
        raise ValueError("antecedent must be non-empty")
    for j in idx:
        if not 0 <= j < ds.m:
            raise ValueError(f"feature index {j} out of range for m={ds.m}")
    mask = (1 << ds.n) - 1
    for j in idx:
        mask &= ds.feature_masks[j]
    pos_cover = (mask & ds.pos_mask).bit_count()
    neg_cover = mask.bit_count() - pos_cover
    support, confidence, lift = _metrics(pos_cover, neg_cover, ds.n, ds.n_pos)
    return Rule(idx, support, confidence, lift, pos_cover, neg_cover)


def mine_rules(ds: BinaryDataset, cfg: MiningConfig) -> list[Rule]:
    """Enumerate every rule meeting the thresholds, up to max_len features.

    Output is every antecedent with support >= min_support (under the
    configured semantics), confidence >= min_confidence, and at least one
    covered positive row, sorted by (size, lexicographic indices). The
    result is a pure function of the inputs: identical for any worker
    count or scheduling.
    """
    if ds.n_pos == 0:
        raise DataError("dataset has no positive rows; nothing to mine")
    n = ds.n
    n_pos = ds.n_pos
    joint = cfg.support_semantics == SUPPORT_JOINT
    min_support = cfg.min_support
    min_confidence = cfg.min_confidence
    pos_mask = ds.pos_mask
    masks = ds.feature_masks

    def frequent_enough(pos_cover: int, neg_cover: int) -> bool:
        covered = pos_cover if joint else pos_cover + neg_cover
        return covered / n >= min_support - EPS

    emitted: list[Rule] = []

    def maybe_emit(items: tuple[int, ...], pos_cover: int, neg_cover: int) -> None:
        support, confidence, lift = _metrics(pos_cover, neg_cover, n, n_pos)
        if confidence >= min_confidence - EPS:
            emitted.append(Rule(items, support, confidence, lift, pos_cover, neg_cover))

    # Level 1. Branches with zero positive coverage are dropped outright:
    # no superset can regain positives, so none can ever be emitted.
    frequent: dict[tuple[int, ...], int] = {}
    for j in range(ds.m):
        mask = masks[j]
        pos_cover = (mask & pos_mask).bit_count()
        neg_cover = mask.bit_count() - pos_cover
        if pos_cover == 0 or not frequent_enough(pos_cover, neg_cover):
            continue
        frequent[(j,)] = mask
        maybe_emit((j,), pos_cover, neg_cover)

    size = 1
    while frequent and size < cfg.max_len:
        items = sorted(frequent)
        nxt: dict[tuple[int, ...], int] = {}
        for ai, a in enumerate(items):
            for bi in range(ai + 1, len(items)):
                b = items[bi]
                if a[:-1] != b[:-1]:
                    break  # items are sorted, so the shared-prefix block ends here
                cand = a + (b[-1],)
                if any(
                    cand[:k] + cand[k + 1:] not in frequent
                    for k in range(len(cand) - 2)
                ):
                    continue
                mask = frequent[a] & masks[cand[-1]]
                pos_cover = (mask & pos_mask).bit_count()
                neg_cover = mask.bit_count() - pos_cover
                if pos_cover == 0 or not frequent_enough(pos_cover, neg_cover):
                    continue
                nxt[cand] = mask
                maybe_emit(cand, pos_cover, neg_cover)
        frequent = nxt
        size += 1

    emitted.sort(key=lambda r: (len(r.antecedent), r.antecedent))
    return emitted
