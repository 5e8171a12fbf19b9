"""Repeated cross-validation driver: train per fold, evaluate on held-out rows.

Each fold trains on a physically separate copy of its training rows, so
nothing mined, validated, or selected ever sees the test fold. Folds that
cannot produce a model (no candidates, single-class split, empty selection)
are recorded as failed with a reason and excluded from the aggregates.
"""

from __future__ import annotations

import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .classifier import RuleModel, roc
from .dataset import BinaryDataset, FoldPlan
from .errors import DataError, NoCandidatesError
from .mining import MiningConfig
from .selection import DEFAULT_NODE_BUDGET, select_rule_set


@dataclass(frozen=True)
class FoldRecord:
    repeat: int
    fold: int
    status: str  # "ok" | "failed"
    reason: str = ""
    auc: float | None = None
    rule_count: int | None = None
    feature_count: int | None = None
    solver_proof: str | None = None
    gap: float | None = None
    rules: tuple[tuple[str, ...], ...] = ()
    runtime: float = 0.0  # wall-clock seconds; never serialized
    # Per-threshold (threshold, sensitivity, specificity) sweep for this
    # fold's held-out rows; exported by the CLI's --roc-out, not by to_json.
    roc_points: tuple[tuple[float, float, float], ...] = ()

    def to_doc(self) -> dict:
        doc: dict = {"repeat": self.repeat, "fold": self.fold, "status": self.status}
        if self.status == "ok":
            doc.update(
                auc=self.auc,
                rule_count=self.rule_count,
                feature_count=self.feature_count,
                solver_proof=self.solver_proof,
                gap=self.gap,
                rules=[list(r) for r in self.rules],
            )
        else:
            doc["reason"] = self.reason
        return doc


@dataclass(frozen=True)
class CvReport:
    """Per-fold records plus mean/std aggregates and the effective config.

    Aggregate means are the plain arithmetic mean of the successful folds'
    values; std is the sample standard deviation (0 when fewer than two
    folds succeeded). Wall-clock runtimes stay in memory only: the JSON
    form must be byte-identical across reruns of the same config and seed.
    """

    config: dict
    records: tuple[FoldRecord, ...]

    @property
    def ok_records(self) -> tuple[FoldRecord, ...]:
        return tuple(r for r in self.records if r.status == "ok")

    @property
    def failed_records(self) -> tuple[FoldRecord, ...]:
        return tuple(r for r in self.records if r.status != "ok")

    def aggregates(self) -> dict:
        ok = self.ok_records

        def mean_std(values: list[float]) -> tuple[float, float]:
            mean = statistics.mean(values)
            std = statistics.stdev(values) if len(values) > 1 else 0.0
            return mean, std

        auc_mean, auc_std = mean_std([r.auc for r in ok])
        rule_mean, rule_std = mean_std([float(r.rule_count) for r in ok])
        feat_mean, feat_std = mean_std([float(r.feature_count) for r in ok])
        return {
            "auc_mean": auc_mean,
            "auc_std": auc_std,
            "rule_count_mean": rule_mean,
            "rule_count_std": rule_std,
            "feature_count_mean": feat_mean,
            "feature_count_std": feat_std,
            "folds_ok": len(ok),
            "folds_failed": len(self.failed_records),
        }

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "aggregates": self.aggregates(),
            "records": [r.to_doc() for r in self.records],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def write_roc_csv(self, fh) -> None:
        """Plot-ready per-fold threshold sweeps, one row per ROC point."""
        fh.write("repeat,fold,threshold,sensitivity,one_minus_specificity\n")
        for rec in self.ok_records:
            for threshold, sensitivity, specificity in rec.roc_points:
                fh.write(
                    f"{rec.repeat},{rec.fold},{threshold!r},"
                    f"{sensitivity!r},{1.0 - specificity!r}\n"
                )


def _fold_task(payload: tuple) -> FoldRecord:
    (
        ds,
        cfg,
        alpha,
        beta,
        gamma,
        lam,
        lambda_large,
        node_budget,
        repeat,
        fold,
        train_idx,
        test_idx,
    ) = payload
    start = time.perf_counter()
    try:
        training = ds.subset(train_idx)
        solution, mined = select_rule_set(
            training,
            cfg,
            alpha=alpha,
            beta=beta,
            gamma=gamma,
            lam=lam,
            lambda_large=lambda_large,
            node_budget=node_budget,
        )
        if not solution.selected_rules:
            raise NoCandidatesError("the optimizer selected no rules")
        model = RuleModel(
            training.features,
            tuple(mined[k] for k in solution.selected_rules),
        )
        report = roc(model, ds.subset(test_idx))
    except (DataError, NoCandidatesError) as exc:
        return FoldRecord(
            repeat=repeat,
            fold=fold,
            status="failed",
            reason=str(exc),
            runtime=time.perf_counter() - start,
        )
    rule_names = tuple(
        tuple(training.features[j] for j in mined[k].antecedent)
        for k in solution.selected_rules
    )
    return FoldRecord(
        repeat=repeat,
        fold=fold,
        status="ok",
        auc=report.auc,
        rule_count=len(solution.selected_rules),
        feature_count=len(solution.used_features),
        solver_proof=solution.proof,
        gap=solution.gap,
        rules=rule_names,
        runtime=time.perf_counter() - start,
        roc_points=tuple(
            (pt.threshold, pt.sensitivity, pt.specificity) for pt in report.points
        ),
    )


def run_cv(
    ds: BinaryDataset,
    cfg: MiningConfig,
    plan: FoldPlan,
    *,
    alpha: float = 1.0,
    beta: float = 1.0,
    gamma: float = 1.0,
    lam: float = 1.0,
    lambda_large: bool = False,
    node_budget: int = DEFAULT_NODE_BUDGET,
    workers: int = 1,
    extra_config: dict | None = None,
) -> CvReport:
    """Train and evaluate every (repeat, fold) split of the plan.

    Folds are independent; with workers > 1 they run in separate
    processes, assembled back in plan order so the report is identical
    for any worker count. Raises when every fold fails.
    """
    for assign in plan.assignments:
        if len(assign) != ds.n:
            raise ValueError("fold plan does not match the dataset size")
    payloads = [
        (ds, cfg, alpha, beta, gamma, lam, lambda_large, node_budget, r, f, train, test)
        for r, f, train, test in plan.iter_splits()
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_fold_task, payloads))
    else:
        records = [_fold_task(p) for p in payloads]
    if not any(r.status == "ok" for r in records):
        raise NoCandidatesError(
            f"all {len(records)} folds failed; first reason: {records[0].reason}"
        )
    config = {
        "support": cfg.min_support,
        "confidence": cfg.min_confidence,
        "max_len": cfg.max_len,
        "support_semantics": cfg.support_semantics,
        "alpha": alpha,
        "beta": beta,
        "gamma": gamma,
        "lambda": lam,
        "lambda_large": lambda_large,
        "node_budget": node_budget,
        "repeats": plan.repeats,
        "folds": plan.folds,
        "seed": plan.seed,
        "fold_rng": plan.algorithm,
    }
    if extra_config:
        config.update(extra_config)
    return CvReport(config=config, records=tuple(records))
