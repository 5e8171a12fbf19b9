"""Rule-subset selection as a 0-1 program, solved exactly by branch-and-bound.

The model minimizes

    alpha * |used features| + beta * |selected rules|
    + gamma * |covered negatives| - lam * |covered positives|

over rule subsets. Because all weights are non-negative, the patient and
feature indicator variables of the full integer program are determined by
the rule choice alone: a positive row counts as covered iff some selected
rule covers it, a negative row is forced covered iff some selected rule
covers it, and a feature is used iff it appears in a selected rule. The
search therefore runs over rule subsets only, with the full big-M model
kept in the test suite as an independent cross-check.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

from .coverage import CoverageMatrix, _indices, build_coverage
from .dataset import BinaryDataset
from .errors import NoCandidatesError
from .mining import EPS, MiningConfig, Rule, mine_rules

DEFAULT_NODE_BUDGET = 10_000_000

PROOF_OPTIMAL = "optimal"
PROOF_GREEDY = "greedy_heuristic"


class ObjectiveTerms(NamedTuple):
    feature_cost: float
    rule_cost: float
    neg_penalty: float
    pos_reward: float


@dataclass(frozen=True)
class SelectionProblem:
    """A coverage matrix plus objective weights and validation thresholds.

    ``big_m`` is the constant that deactivates the linking constraints of
    the full model when an indicator is 0; it is pinned to p + 1.
    """

    coverage: CoverageMatrix
    alpha: float
    beta: float
    gamma: float
    lam: float
    thresholds: MiningConfig
    big_m: int

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "lam"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.big_m != self.coverage.p + 1:
            raise ValueError("big_m must equal the rule count plus one")

    @classmethod
    def from_coverage(
        cls,
        coverage: CoverageMatrix,
        *,
        alpha: float = 1.0,
        beta: float = 1.0,
        gamma: float = 1.0,
        lam: float = 1.0,
        thresholds: MiningConfig | None = None,
    ) -> SelectionProblem:
        return cls(
            coverage=coverage,
            alpha=alpha,
            beta=beta,
            gamma=gamma,
            lam=lam,
            thresholds=thresholds if thresholds is not None else MiningConfig(),
            big_m=coverage.p + 1,
        )


@dataclass(frozen=True)
class SelectionSolution:
    """A rule choice with its derived coverage and objective breakdown.

    ``gap`` is None for greedy output, 0.0 for proven optima, and the
    distance to the best outstanding bound when the node budget ran out.
    """

    selected_rules: tuple[int, ...]
    covered_pos: tuple[int, ...]
    covered_neg: tuple[int, ...]
    used_features: tuple[int, ...]
    objective: float
    objective_terms: ObjectiveTerms
    proof: str
    gap: float | None = None
    nodes: int = 0


def _feature_mask(antecedent: tuple[int, ...]) -> int:
    mask = 0
    for j in antecedent:
        mask |= 1 << j
    return mask


def _selection_masks(coverage: CoverageMatrix, rule_indices: Sequence[int]) -> tuple[int, int, int]:
    pos = neg = feat = 0
    for k in rule_indices:
        pos |= coverage.columns[k] & coverage.pos_mask
        neg |= coverage.columns[k] & coverage.neg_mask
        feat |= _feature_mask(coverage.rules[k].antecedent)
    return pos, neg, feat


def selection_objective(
    problem: SelectionProblem, rule_indices: Sequence[int]
) -> tuple[float, ObjectiveTerms]:
    """Closed-form objective of a rule choice, with its term breakdown."""
    pos, neg, feat = _selection_masks(problem.coverage, rule_indices)
    terms = ObjectiveTerms(
        feature_cost=problem.alpha * feat.bit_count(),
        rule_cost=problem.beta * len(set(rule_indices)),
        neg_penalty=problem.gamma * neg.bit_count(),
        pos_reward=problem.lam * pos.bit_count(),
    )
    objective = terms.feature_cost + terms.rule_cost + terms.neg_penalty - terms.pos_reward
    return objective, terms


def _solution(
    problem: SelectionProblem,
    rule_indices: Sequence[int],
    proof: str,
    gap: float | None,
    nodes: int,
) -> SelectionSolution:
    selected = tuple(sorted(set(rule_indices)))
    pos, neg, feat = _selection_masks(problem.coverage, selected)
    objective, terms = selection_objective(problem, selected)
    return SelectionSolution(
        selected_rules=selected,
        covered_pos=_indices(pos),
        covered_neg=_indices(neg),
        used_features=_indices(feat),
        objective=objective,
        objective_terms=terms,
        proof=proof,
        gap=gap,
        nodes=nodes,
    )


def validate_candidates(problem: SelectionProblem) -> list[int]:
    """Indices of rules meeting the three selectability constraints.

    A rule survives when its total coverage (both classes) reaches the
    support threshold, its confidence reaches the confidence threshold,
    and its antecedent is within the length cap. Counts are recomputed
    from the coverage columns, not taken from the stored rule metrics.
    """
    cov = problem.coverage
    cfg = problem.thresholds
    n = cov.n_rows
    out: list[int] = []
    for k in range(cov.p):
        pos_cover = cov.pos_cover(k)
        neg_cover = cov.neg_cover(k)
        total = pos_cover + neg_cover
        if total / n < cfg.min_support - EPS:
            continue
        confidence = pos_cover / total if total else 0.0
        if confidence < cfg.min_confidence - EPS:
            continue
        if len(cov.rules[k].antecedent) > cfg.max_len:
            continue
        out.append(k)
    if not out:
        raise NoCandidatesError(
            "no rule satisfies the support/confidence/length constraints; "
            "lower --support or --confidence"
        )
    return out


def _check_candidates(problem: SelectionProblem, candidates: Sequence[int]) -> list[int]:
    cand = sorted(set(candidates))
    if not cand:
        raise NoCandidatesError("candidate list is empty")
    for k in cand:
        if not 0 <= k < problem.coverage.p:
            raise ValueError(f"candidate index {k} out of range")
    return cand


def solve_greedy(problem: SelectionProblem, candidates: Sequence[int]) -> SelectionSolution:
    """Repeatedly add the rule with the most negative marginal objective.

    Stops as soon as no remaining rule strictly improves the objective;
    ties go to the smallest rule index. Deterministic.
    """
    cand = _check_candidates(problem, candidates)
    cov = problem.coverage
    pos_cols = {k: cov.columns[k] & cov.pos_mask for k in cand}
    neg_cols = {k: cov.columns[k] & cov.neg_mask for k in cand}
    feat_masks = {k: _feature_mask(cov.rules[k].antecedent) for k in cand}
    alpha, beta, gamma, lam = problem.alpha, problem.beta, problem.gamma, problem.lam

    chosen: list[int] = []
    remaining = list(cand)
    pos = neg = feat = 0
    while remaining:
        best_k = None
        best_delta = 0.0
        for k in remaining:
            new_pos = (pos_cols[k] & ~pos).bit_count()
            new_neg = (neg_cols[k] & ~neg).bit_count()
            new_feat = (feat_masks[k] & ~feat).bit_count()
            delta = alpha * new_feat + beta + gamma * new_neg - lam * new_pos
            if delta < best_delta:
                best_delta = delta
                best_k = k
        if best_k is None:
            break
        chosen.append(best_k)
        remaining.remove(best_k)
        pos |= pos_cols[best_k]
        neg |= neg_cols[best_k]
        feat |= feat_masks[best_k]
    return _solution(problem, chosen, PROOF_GREEDY, None, 0)


def solve_exact(
    problem: SelectionProblem,
    candidates: Sequence[int],
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> SelectionSolution:
    """Depth-first branch-and-bound over the candidate rules, in index order.

    The incumbent starts from the greedy solution. The bound below a node
    assumes the remaining rules pay only their selection cost beta and can
    collect their not-yet-covered positives, capped by the union of what
    remains coverable; alpha and gamma terms are dropped, which only ever
    lowers the bound, so it never prunes a true optimum. Among equal
    objectives the lexicographically smallest selected-index set wins.
    If the node budget runs out the best incumbent is returned with the
    remaining optimality gap.
    """
    if node_budget <= 0:
        raise ValueError("node budget must be positive")
    cand = _check_candidates(problem, candidates)
    cov = problem.coverage
    alpha, beta, gamma, lam = problem.alpha, problem.beta, problem.gamma, problem.lam
    depth_count = len(cand)
    pos_cols = [cov.columns[k] & cov.pos_mask for k in cand]
    neg_cols = [cov.columns[k] & cov.neg_mask for k in cand]
    feat_masks = [_feature_mask(cov.rules[k].antecedent) for k in cand]

    warm = solve_greedy(problem, cand)
    incumbent_obj = warm.objective
    incumbent_sel = warm.selected_rules

    def tail_bound(depth: int, pos: int) -> float:
        # Lower bound on the objective change any completion below this
        # node can achieve: sort remaining rules by fresh positives, pay
        # beta each, cap the total reward by the union of fresh positives.
        gains: list[int] = []
        union = 0
        for i in range(depth, depth_count):
            fresh = pos_cols[i] & ~pos
            if fresh:
                gains.append(fresh.bit_count())
                union |= fresh
        if not gains:
            return 0.0
        gains.sort(reverse=True)
        cap = union.bit_count()
        best = 0.0
        covered = 0
        for t, gain in enumerate(gains, start=1):
            covered = min(covered + gain, cap)
            value = beta * t - lam * covered
            if value < best:
                best = value
            if covered >= cap:
                break
        return best

    nodes = 0
    # Node: (depth, selected positions, pos/neg/feature masks, objective).
    stack: list[tuple[int, tuple[int, ...], int, int, int, float]] = [
        (0, (), 0, 0, 0, 0.0)
    ]
    while stack:
        if nodes >= node_budget:
            break
        depth, sel, pos, neg, feat, obj = stack.pop()
        nodes += 1
        # Excluding every remaining rule is itself a complete selection.
        if obj < incumbent_obj:
            incumbent_obj = obj
            incumbent_sel = tuple(cand[i] for i in sel)
        elif obj == incumbent_obj:
            rule_sel = tuple(cand[i] for i in sel)
            if rule_sel < incumbent_sel:
                incumbent_sel = rule_sel
        if depth == depth_count:
            continue
        if obj + tail_bound(depth, pos) > incumbent_obj:
            continue
        # Exclude pushed first so the include branch is explored first.
        stack.append((depth + 1, sel, pos, neg, feat, obj))
        inc_pos = pos | pos_cols[depth]
        inc_neg = neg | neg_cols[depth]
        inc_feat = feat | feat_masks[depth]
        inc_obj = (
            alpha * inc_feat.bit_count()
            + beta * (len(sel) + 1)
            + gamma * inc_neg.bit_count()
            - lam * inc_pos.bit_count()
        )
        stack.append((depth + 1, sel + (depth,), inc_pos, inc_neg, inc_feat, inc_obj))

    if stack:
        best_open = min(
            obj + tail_bound(depth, pos)
            for depth, _sel, pos, _neg, _feat, obj in stack
        )
        if best_open >= incumbent_obj:
            proof, gap = PROOF_OPTIMAL, 0.0
        else:
            proof, gap = PROOF_GREEDY, incumbent_obj - best_open
    else:
        proof, gap = PROOF_OPTIMAL, 0.0
    return _solution(problem, incumbent_sel, proof, gap, nodes)


def large_lambda(ds: BinaryDataset, rule_count: int, alpha: float, beta: float, gamma: float) -> float:
    """A reward weight that provably makes covering any extra positive pay off.

    One more covered positive earns lam, while the worst possible price of
    achieving it is bounded by every feature, every rule, and every
    negative row being charged; exceeding that total by one settles it.
    """
    return gamma * ds.n_neg + alpha * ds.m + beta * rule_count + 1.0


def select_rule_set(
    ds: BinaryDataset,
    cfg: MiningConfig,
    *,
    alpha: float = 1.0,
    beta: float = 1.0,
    gamma: float = 1.0,
    lam: float = 1.0,
    lambda_large: bool = False,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[SelectionSolution, list[Rule]]:
    """Run the two-phase pipeline: mine candidates, then pick the best subset.

    Phase 1 mines all threshold-satisfying rules; phase 2 validates them
    against the selection constraints and solves the reduced subset
    problem exactly (greedy warm start). Returns the solution together
    with the full mined candidate list its rule indices point into.
    """
    rules = mine_rules(ds, cfg)
    if not rules:
        raise NoCandidatesError(
            "mining produced no candidate rules; lower --support or --confidence"
        )
    coverage = build_coverage(ds, rules)
    if lambda_large:
        lam = large_lambda(ds, len(rules), alpha, beta, gamma)
    problem = SelectionProblem.from_coverage(
        coverage, alpha=alpha, beta=beta, gamma=gamma, lam=lam, thresholds=cfg
    )
    candidates = validate_candidates(problem)
    solution = solve_exact(problem, candidates, node_budget)
    return solution, rules
