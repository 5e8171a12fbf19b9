"""rulecover: interpretable rule-set binary classifiers.

Mines class-association rules for the positive class, selects an optimal
rule subset by exact 0-1 optimization, scores patients by average rule
confidence, and evaluates with a threshold-sweep ROC/AUC.
"""

__version__ = "0.1.0"

from .classifier import (
    RocPoint,
    RocReport,
    RuleModel,
    classify,
    roc,
    roc_from_scores,
    score,
    score_dataset,
)
from .coverage import CoverageMatrix, build_coverage
from .dataset import (
    FOLD_RNG_ALGORITHM,
    BinaryDataset,
    FoldPlan,
    drop_constant_features,
    load_csv,
    make_folds,
)
from .errors import DataError, NoCandidatesError, RuleCoverError
from .harness import CvReport, FoldRecord, run_cv
from .mining import (
    SUPPORT_ANTECEDENT,
    SUPPORT_JOINT,
    MiningConfig,
    Rule,
    mine_rules,
    score_rule,
)
from .selection import (
    DEFAULT_NODE_BUDGET,
    ObjectiveTerms,
    SelectionProblem,
    SelectionSolution,
    large_lambda,
    select_rule_set,
    selection_objective,
    solve_exact,
    solve_greedy,
    validate_candidates,
)

__all__ = [
    "__version__",
    "BinaryDataset",
    "FoldPlan",
    "FOLD_RNG_ALGORITHM",
    "load_csv",
    "drop_constant_features",
    "make_folds",
    "MiningConfig",
    "Rule",
    "SUPPORT_JOINT",
    "SUPPORT_ANTECEDENT",
    "mine_rules",
    "score_rule",
    "CoverageMatrix",
    "build_coverage",
    "SelectionProblem",
    "SelectionSolution",
    "ObjectiveTerms",
    "DEFAULT_NODE_BUDGET",
    "validate_candidates",
    "solve_greedy",
    "solve_exact",
    "select_rule_set",
    "selection_objective",
    "large_lambda",
    "RuleModel",
    "RocReport",
    "RocPoint",
    "score",
    "score_dataset",
    "classify",
    "roc",
    "roc_from_scores",
    "CvReport",
    "FoldRecord",
    "run_cv",
    "RuleCoverError",
    "DataError",
    "NoCandidatesError",
]
