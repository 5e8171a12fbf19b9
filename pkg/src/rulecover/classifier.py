"""Scoring, thresholded classification, and ROC/AUC for a selected rule set.

A patient's score is the arithmetic mean of the confidences of all rules
covering them; a patient covered by no rule scores exactly 0, reflecting
that unmatched cases are simply not identified. Classification is strict:
positive iff score > threshold.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TextIO

from .dataset import BinaryDataset
from .errors import DataError
from .mining import Rule

MODEL_FORMAT = "rulecover-model-v1"


@dataclass(frozen=True)
class RuleModel:
    """A non-empty rule list with the feature names its indices refer to."""

    feature_names: tuple[str, ...]
    rules: tuple[Rule, ...]

    def __post_init__(self) -> None:
        if not self.rules:
            raise DataError("a rule model needs at least one rule")
        for rule in self.rules:
            if not 0.0 <= rule.confidence <= 1.0:
                raise DataError("rule confidence outside [0, 1]")
            for j in rule.antecedent:
                if not 0 <= j < len(self.feature_names):
                    raise DataError(f"rule feature index {j} out of range")

    def to_json(self) -> str:
        doc = {
            "format": MODEL_FORMAT,
            "feature_names": list(self.feature_names),
            "rules": [rule.to_dict(self.feature_names) for rule in self.rules],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> RuleModel:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"model file is not valid JSON: {exc}") from None
        if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
            raise DataError(f"unrecognized model format {doc.get('format') if isinstance(doc, dict) else doc!r}")
        try:
            feature_names = tuple(doc["feature_names"])
            rules = tuple(Rule.from_dict(r, feature_names) for r in doc["rules"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"model file is malformed: {exc}") from None
        return RuleModel(feature_names, rules)


def score(model: RuleModel, patient_row: Sequence[int]) -> float:
    """Mean confidence of the rules covering this row; 0.0 when none do."""
    if len(patient_row) != len(model.feature_names):
        raise DataError(
            f"row has {len(patient_row)} cells, model expects {len(model.feature_names)}"
        )
    total = 0.0
    count = 0
    for rule in model.rules:
        if all(patient_row[j] for j in rule.antecedent):
            total += rule.confidence
            count += 1
    return total / count if count else 0.0


def classify(model: RuleModel, patient_row: Sequence[int], theta_p: float) -> bool:
    """True (positive) iff the row's score strictly exceeds theta_p."""
    if not 0.0 <= theta_p <= 1.0:
        raise ValueError("theta_p must be in [0, 1]")
    return score(model, patient_row) > theta_p


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    sensitivity: float
    specificity: float


@dataclass(frozen=True)
class RocReport:
    """Threshold sweep points, trapezoidal AUC, and one operating confusion.

    Points are sorted by threshold; the first and last thresholds sit
    below the minimum and above the maximum score, so the curve always
    reaches (1,1) and (0,0). Confusion is (TP, FN, TN, FP) at
    ``operating_threshold``.
    """

    points: tuple[RocPoint, ...]
    auc: float
    operating_threshold: float
    confusion: tuple[int, int, int, int]

    def to_json(self) -> str:
        tp, fn, tn, fp = self.confusion
        doc = {
            "auc": self.auc,
            "operating_threshold": self.operating_threshold,
            "confusion": {"tp": tp, "fn": fn, "tn": tn, "fp": fp},
            "points": [
                {
                    "threshold": pt.threshold,
                    "sensitivity": pt.sensitivity,
                    "specificity": pt.specificity,
                }
                for pt in self.points
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def write_plot_csv(self, fh: TextIO) -> None:
        """Plot-ready sweep: threshold, sensitivity, 1 - specificity."""
        fh.write("threshold,sensitivity,one_minus_specificity\n")
        for pt in self.points:
            fh.write(f"{pt.threshold!r},{pt.sensitivity!r},{1.0 - pt.specificity!r}\n")


def roc_from_scores(
    scores: Sequence[float],
    labels: Sequence[bool],
    operating_threshold: float = 0.5,
) -> RocReport:
    """Build the ROC over all distinct score thresholds plus sentinels.

    At each threshold a row is called positive iff its score is strictly
    greater. AUC is the trapezoid over (1 - specificity, sensitivity),
    which on these thresholds equals the rank statistic with ties worth
    one half.
    """
    if len(scores) != len(labels):
        raise ValueError("scores and labels differ in length")
    pos_scores = sorted(s for s, lab in zip(scores, labels) if lab)
    neg_scores = sorted(s for s, lab in zip(scores, labels) if not lab)
    if not pos_scores or not neg_scores:
        raise DataError("both classes must be present; AUC is undefined otherwise")
    n_pos = len(pos_scores)
    n_neg = len(neg_scores)

    distinct = sorted(set(scores))
    thresholds = [distinct[0] - 1.0] + distinct + [distinct[-1] + 1.0]
    points: list[RocPoint] = []
    for theta in thresholds:
        tp = n_pos - bisect_right(pos_scores, theta)
        fp = n_neg - bisect_right(neg_scores, theta)
        points.append(RocPoint(theta, tp / n_pos, (n_neg - fp) / n_neg))

    # Walk thresholds high to low so (1 - specificity) ascends from 0 to 1.
    auc = 0.0
    prev_x = prev_y = 0.0
    for pt in reversed(points):
        x = 1.0 - pt.specificity
        y = pt.sensitivity
        auc += (x - prev_x) * (y + prev_y) / 2.0
        prev_x, prev_y = x, y

    tp = n_pos - bisect_right(pos_scores, operating_threshold)
    fp = n_neg - bisect_right(neg_scores, operating_threshold)
    confusion = (tp, n_pos - tp, n_neg - fp, fp)
    return RocReport(tuple(points), auc, operating_threshold, confusion)


def _resolve_antecedents(model: RuleModel, ds: BinaryDataset) -> list[tuple[int, ...]]:
    column = {name: j for j, name in enumerate(ds.features)}
    resolved: list[tuple[int, ...]] = []
    for rule in model.rules:
        try:
            resolved.append(
                tuple(sorted(column[model.feature_names[j]] for j in rule.antecedent))
            )
        except KeyError as exc:
            raise DataError(
                f"dataset lacks feature {exc.args[0]!r} required by the model"
            ) from None
    return resolved


def score_dataset(model: RuleModel, ds: BinaryDataset) -> list[float]:
    """Score every row of a dataset, matching model features by name."""
    antecedents = _resolve_antecedents(model, ds)
    all_rows = (1 << ds.n) - 1
    totals = [0.0] * ds.n
    counts = [0] * ds.n
    for antecedent, rule in zip(antecedents, model.rules):
        mask = all_rows
        for j in antecedent:
            mask &= ds.feature_masks[j]
        while mask:
            low = mask & -mask
            i = low.bit_length() - 1
            totals[i] += rule.confidence
            counts[i] += 1
            mask ^= low
    return [t / c if c else 0.0 for t, c in zip(totals, counts)]


def roc(model: RuleModel, ds: BinaryDataset, operating_threshold: float = 0.5) -> RocReport:
    """Score a labeled dataset and sweep the decision threshold."""
    scores = score_dataset(model, ds)
    return roc_from_scores(scores, ds.positives, operating_threshold)
