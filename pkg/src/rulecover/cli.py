"""Command-line interface: mine, select, evaluate, cv.

Option precedence is defaults < config file < explicit flags. Config files
are TOML with keys mirroring the flag names. Reports go to stdout as JSON;
human-readable summaries go to stderr. Exit codes: 0 success, 2 usage
error, 3 data error, 4 empty-candidate error.
"""

from __future__ import annotations

import json
import sys

import click
from click.core import ParameterSource

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .classifier import RuleModel, roc
from .dataset import drop_constant_features, load_csv, make_folds
from .errors import DataError, NoCandidatesError
from .harness import run_cv
from .mining import SUPPORT_ANTECEDENT, SUPPORT_JOINT, MiningConfig, mine_rules
from .selection import DEFAULT_NODE_BUDGET, large_lambda, select_rule_set

_CONFIG_ALIASES = {"lambda": "lam"}


def _merge_config(ctx: click.Context, config_path: str | None, values: dict) -> dict:
    """Overlay config-file values onto defaults; explicit flags still win."""
    if not config_path:
        return values
    try:
        with open(config_path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise click.UsageError(f"config file not found: {config_path}")
    except tomllib.TOMLDecodeError as exc:
        raise click.UsageError(f"invalid config {config_path}: {exc}")
    merged = dict(values)
    for key, value in raw.items():
        name = key.replace("-", "_")
        name = _CONFIG_ALIASES.get(name, name)
        if name not in values:
            raise click.UsageError(f"invalid config {config_path}: unknown key {key!r}")
        if ctx.get_parameter_source(name) == ParameterSource.DEFAULT:
            merged[name] = value
    return merged


def _data_options(fn):
    for option in reversed([
        click.option("--data", required=True, help="CSV file of 0/1 cells with a header row."),
        click.option("--label", required=True, help="Name of the class label column."),
        click.option("--positive", required=True, help="Label value of the positive class."),
        click.option("--drop-constant", is_flag=True, default=False,
                      help="Drop all-zero and all-one feature columns first."),
    ]):
        fn = option(fn)
    return fn


def _mining_options(fn):
    for option in reversed([
        click.option("--support", type=float, default=0.01, show_default=True,
                      help="Minimum support threshold."),
        click.option("--confidence", type=float, default=0.7, show_default=True,
                      help="Minimum confidence threshold."),
        click.option("--max-len", type=int, default=4, show_default=True,
                      help="Maximum antecedent size."),
        click.option("--support-semantics", type=click.Choice([SUPPORT_JOINT, SUPPORT_ANTECEDENT]),
                      default=SUPPORT_JOINT, show_default=True,
                      help="What the support threshold counts during mining."),
    ]):
        fn = option(fn)
    return fn


def _weight_options(fn):
    for option in reversed([
        click.option("--alpha", type=float, default=1.0, show_default=True,
                      help="Cost per used feature."),
        click.option("--beta", type=float, default=1.0, show_default=True,
                      help="Cost per selected rule."),
        click.option("--gamma", type=float, default=1.0, show_default=True,
                      help="Penalty per covered negative row."),
        click.option("--lambda", "lam", type=float, default=1.0, show_default=True,
                      help="Reward per covered positive row."),
        click.option("--lambda-large", is_flag=True, default=False,
                      help="Override --lambda with a value large enough that covering "
                           "any additional positive always pays off."),
        click.option("--node-budget", type=int, default=DEFAULT_NODE_BUDGET, show_default=True,
                      help="Branch-and-bound node limit before degrading to the incumbent."),
    ]):
        fn = option(fn)
    return fn


_config_option = click.option(
    "--config", "config_path", default=None,
    help="TOML config file; keys mirror flag names, explicit flags win.",
)


@click.group()
@click.version_option(__version__, prog_name="rulecover")
def cli() -> None:
    """Learn interpretable rule-set classifiers from binary feature tables."""


def _load(opts: dict):
    ds = load_csv(opts["data"], opts["label"], opts["positive"])
    dropped: list[str] = []
    if opts["drop_constant"]:
        ds, dropped = drop_constant_features(ds)
    return ds, dropped


def _mining_config(opts: dict) -> MiningConfig:
    return MiningConfig(
        min_support=opts["support"],
        min_confidence=opts["confidence"],
        max_len=opts["max_len"],
        support_semantics=opts["support_semantics"],
    )


def _data_echo(opts: dict, dropped: list[str]) -> dict:
    return {
        "data": opts["data"],
        "label": opts["label"],
        "positive": opts["positive"],
        "drop_constant": opts["drop_constant"],
        "dropped_features": dropped,
        "support": opts["support"],
        "confidence": opts["confidence"],
        "max_len": opts["max_len"],
        "support_semantics": opts["support_semantics"],
    }


@cli.command()
@_data_options
@_mining_options
@_config_option
@click.pass_context
def mine(ctx: click.Context, config_path: str | None, **params) -> None:
    """Mine all class-association rules meeting the thresholds."""
    opts = _merge_config(ctx, config_path, params)
    ds, dropped = _load(opts)
    cfg = _mining_config(opts)
    rules = mine_rules(ds, cfg)
    if not rules:
        raise NoCandidatesError(
            "mining produced no rules; lower --support or --confidence"
        )
    doc = {
        "config": _data_echo(opts, dropped),
        "rule_count": len(rules),
        "rules": [rule.to_dict(ds.features) for rule in rules],
    }
    click.echo(_dumps(doc), nl=False)
    click.echo(f"mined {len(rules)} rules from {ds.n} rows x {ds.m} features", err=True)


@cli.command()
@_data_options
@_mining_options
@_weight_options
@click.option("--model-out", default=None,
              help="Write the selected rules as a model JSON for `evaluate`.")
@_config_option
@click.pass_context
def select(ctx: click.Context, config_path: str | None, model_out: str | None, **params) -> None:
    """Mine candidates and solve for the optimal rule subset."""
    opts = _merge_config(ctx, config_path, params)
    ds, dropped = _load(opts)
    cfg = _mining_config(opts)
    solution, mined = select_rule_set(
        ds,
        cfg,
        alpha=opts["alpha"],
        beta=opts["beta"],
        gamma=opts["gamma"],
        lam=opts["lam"],
        lambda_large=opts["lambda_large"],
        node_budget=opts["node_budget"],
    )
    lam_effective = (
        large_lambda(ds, len(mined), opts["alpha"], opts["beta"], opts["gamma"])
        if opts["lambda_large"]
        else opts["lam"]
    )
    config = _data_echo(opts, dropped)
    config.update(
        alpha=opts["alpha"],
        beta=opts["beta"],
        gamma=opts["gamma"],
        **{"lambda": opts["lam"]},
        lambda_large=opts["lambda_large"],
        lambda_effective=lam_effective,
        node_budget=opts["node_budget"],
    )
    terms = solution.objective_terms
    doc = {
        "config": config,
        "mined_rules": len(mined),
        "objective": solution.objective,
        "objective_terms": {
            "feature_cost": terms.feature_cost,
            "rule_cost": terms.rule_cost,
            "neg_penalty": terms.neg_penalty,
            "pos_reward": terms.pos_reward,
        },
        "proof": solution.proof,
        "gap": solution.gap,
        "nodes": solution.nodes,
        "covered_pos": len(solution.covered_pos),
        "covered_neg": len(solution.covered_neg),
        "used_features": [ds.features[j] for j in solution.used_features],
        "selected_rules": [mined[k].to_dict(ds.features) for k in solution.selected_rules],
    }
    click.echo(_dumps(doc), nl=False)
    if model_out is not None:
        if not solution.selected_rules:
            raise NoCandidatesError("selection is empty; there is no model to write")
        model = RuleModel(ds.features, tuple(mined[k] for k in solution.selected_rules))
        with open(model_out, "w", encoding="utf-8") as fh:
            fh.write(model.to_json())
    click.echo(
        f"selected {len(solution.selected_rules)} of {len(mined)} rules, "
        f"objective {solution.objective:.2f} ({solution.proof})",
        err=True,
    )


@cli.command()
@click.option("--model", "model_path", required=True, help="Model JSON written by `select`.")
@_data_options
@click.option("--theta", type=float, default=0.5, show_default=True,
              help="Operating threshold for the reported confusion counts.")
@click.option("--roc-out", default=None,
              help="Write the plot-ready threshold sweep CSV here.")
@_config_option
@click.pass_context
def evaluate(ctx: click.Context, config_path: str | None, model_path: str,
             theta: float, roc_out: str | None, **params) -> None:
    """Score a labeled test CSV with a saved model and report ROC/AUC."""
    opts = _merge_config(ctx, config_path, dict(params, theta=theta))
    try:
        with open(model_path, encoding="utf-8") as fh:
            model = RuleModel.from_json(fh.read())
    except FileNotFoundError:
        raise DataError(f"model file not found: {model_path}")
    ds, _dropped = _load(opts)
    report = roc(model, ds, operating_threshold=opts["theta"])
    click.echo(report.to_json(), nl=False)
    if roc_out is not None:
        with open(roc_out, "w", encoding="utf-8") as fh:
            report.write_plot_csv(fh)
    click.echo(
        f"AUC: {report.auc:.2f} on {ds.n_pos} positive / {ds.n_neg} negative rows",
        err=True,
    )


@cli.command()
@_data_options
@_mining_options
@_weight_options
@click.option("--repeats", type=int, default=10, show_default=True,
              help="Number of shuffled cross-validation repeats.")
@click.option("--folds", type=int, default=5, show_default=True,
              help="Folds per repeat.")
@click.option("--seed", type=int, default=42, show_default=True,
              help="Seed for the fold shuffles.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Worker processes for fold evaluation (result is identical "
                   "for any worker count).")
@click.option("--roc-out", default=None,
              help="Write every fold's plot-ready threshold sweep CSV here.")
@_config_option
@click.pass_context
def cv(ctx: click.Context, config_path: str | None, roc_out: str | None, **params) -> None:
    """Repeated stratified cross-validation with per-fold AUC and model size."""
    opts = _merge_config(ctx, config_path, params)
    ds, dropped = _load(opts)
    cfg = _mining_config(opts)
    plan = make_folds(ds, opts["repeats"], opts["folds"], opts["seed"])
    report = run_cv(
        ds,
        cfg,
        plan,
        alpha=opts["alpha"],
        beta=opts["beta"],
        gamma=opts["gamma"],
        lam=opts["lam"],
        lambda_large=opts["lambda_large"],
        node_budget=opts["node_budget"],
        workers=opts["workers"],
        extra_config={
            "data": opts["data"],
            "label": opts["label"],
            "positive": opts["positive"],
            "drop_constant": opts["drop_constant"],
            "dropped_features": dropped,
        },
    )
    click.echo(report.to_json(), nl=False)
    if roc_out is not None:
        with open(roc_out, "w", encoding="utf-8") as fh:
            report.write_roc_csv(fh)
    click.echo("repeat fold status    auc rules feats  proof", err=True)
    for rec in report.records:
        if rec.status == "ok":
            click.echo(
                f"{rec.repeat:6d} {rec.fold:4d} {rec.status:>6s} {rec.auc:6.2f} "
                f"{rec.rule_count:5d} {rec.feature_count:5d}  {rec.solver_proof} "
                f"[{rec.runtime:.2f}s]",
                err=True,
            )
        else:
            click.echo(
                f"{rec.repeat:6d} {rec.fold:4d} {rec.status:>6s}  ({rec.reason})",
                err=True,
            )
    agg = report.aggregates()
    click.echo(
        f"AUC {agg['auc_mean']:.2f} +/- {agg['auc_std']:.2f} | "
        f"rules {agg['rule_count_mean']:.2f} +/- {agg['rule_count_std']:.2f} | "
        f"features {agg['feature_count_mean']:.2f} +/- {agg['feature_count_std']:.2f} | "
        f"{agg['folds_ok']} folds ok, {agg['folds_failed']} failed",
        err=True,
    )


def _dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def main(argv: list[str] | None = None) -> int:
    """Run the CLI; returns the exit code instead of raising SystemExit."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"error: usage: {exc.format_message()}", err=True)
        return 2
    except click.ClickException as exc:
        click.echo(f"error: usage: {exc.format_message()}", err=True)
        return 2
    except click.exceptions.Abort:
        click.echo("error: usage: aborted", err=True)
        return 2
    except DataError as exc:
        click.echo(f"error: data: {exc}", err=True)
        return 3
    except NoCandidatesError as exc:
        click.echo(f"error: candidates: {exc}", err=True)
        return 4
    except (ValueError, TypeError) as exc:
        click.echo(f"error: usage: {exc}", err=True)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
