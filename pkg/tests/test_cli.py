from __future__ import annotations

import json

import pytest

from rulecover.cli import main
from synthgen import planted_dataset


@pytest.fixture()
def planted_csv(tmp_path):
    ds, planted = planted_dataset(n=120, n_rules=2, seed=23, noise_features=2)
    path = tmp_path / "train.csv"
    with open(path, "w", encoding="utf-8") as fh:
        ds.to_csv(fh, label_column="outcome")
    return path, planted


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


DATA_FLAGS = ("--label", "outcome", "--positive", "1")


class TestMine:
    def test_mine_emits_rule_json(self, capsys, planted_csv):
        path, planted = planted_csv
        code, out, err = run(
            capsys, "mine", "--data", str(path), *DATA_FLAGS,
            "--support", "0.05", "--confidence", "0.7", "--max-len", "2",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["rule_count"] == len(doc["rules"])
        mined = {tuple(r["features"]) for r in doc["rules"]}
        for pair in planted:
            assert pair in mined
        assert doc["config"]["support"] == 0.05

    def test_mine_no_rules_exits_4(self, capsys, planted_csv):
        path, _ = planted_csv
        code, out, err = run(
            capsys, "mine", "--data", str(path), *DATA_FLAGS,
            "--support", "0.99", "--confidence", "0.99",
        )
        assert code == 4
        assert err.startswith("error: candidates:")

    def test_missing_data_file_exits_3(self, capsys, tmp_path):
        missing = tmp_path / "absent.csv"
        code, out, err = run(capsys, "mine", "--data", str(missing), *DATA_FLAGS)
        assert code == 3
        assert str(missing) in err
        assert err.count("\n") == 1

    def test_unknown_subcommand_exits_2(self, capsys):
        code, out, err = run(capsys, "transmogrify")
        assert code == 2
        assert err.startswith("error: usage:")


class TestSelectAndEvaluate:
    def test_select_writes_model_and_evaluate_reads_it(self, capsys, tmp_path, planted_csv):
        path, planted = planted_csv
        model_path = tmp_path / "model.json"
        code, out, err = run(
            capsys, "select", "--data", str(path), *DATA_FLAGS,
            "--support", "0.05", "--confidence", "0.7", "--max-len", "2",
            "--model-out", str(model_path),
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["proof"] == "optimal"
        assert doc["gap"] == 0.0
        chosen = {tuple(r["features"]) for r in doc["selected_rules"]}
        assert chosen == set(planted)
        terms = doc["objective_terms"]
        assert doc["objective"] == pytest.approx(
            terms["feature_cost"] + terms["rule_cost"]
            + terms["neg_penalty"] - terms["pos_reward"]
        )

        roc_path = tmp_path / "roc.csv"
        code, out, err = run(
            capsys, "evaluate", "--model", str(model_path),
            "--data", str(path), *DATA_FLAGS, "--roc-out", str(roc_path),
        )
        assert code == 0
        report = json.loads(out)
        assert 0.9 <= report["auc"] <= 1.0
        assert set(report["confusion"]) == {"tp", "fn", "tn", "fp"}
        lines = roc_path.read_text().strip().splitlines()
        assert lines[0] == "threshold,sensitivity,one_minus_specificity"
        assert len(lines) == 1 + len(report["points"])
        # Human summary rounds to two decimals; JSON keeps full precision.
        assert f"AUC: {report['auc']:.2f}" in err

    def test_lambda_large_echoed(self, capsys, planted_csv):
        path, _ = planted_csv
        code, out, _ = run(
            capsys, "select", "--data", str(path), *DATA_FLAGS,
            "--support", "0.05", "--confidence", "0.7", "--max-len", "2",
            "--lambda-large",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["config"]["lambda_large"] is True
        assert doc["config"]["lambda_effective"] > doc["config"]["lambda"]

    def test_evaluate_missing_model_exits_3(self, capsys, planted_csv, tmp_path):
        path, _ = planted_csv
        code, _, err = run(
            capsys, "evaluate", "--model", str(tmp_path / "no.json"),
            "--data", str(path), *DATA_FLAGS,
        )
        assert code == 3
        assert "model file not found" in err


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, capsys, tmp_path, planted_csv):
        path, _ = planted_csv
        config = tmp_path / "run.toml"
        config.write_text(
            'support = 0.2\nconfidence = 0.7\n"max-len" = 2\n', encoding="utf-8"
        )
        code, out, _ = run(
            capsys, "mine", "--data", str(path), *DATA_FLAGS,
            "--config", str(config), "--support", "0.05",
        )
        assert code == 0
        doc = json.loads(out)
        # The flag beats the config; the config beats the default.
        assert doc["config"]["support"] == 0.05
        assert doc["config"]["max_len"] == 2

    def test_unknown_config_key_exits_2(self, capsys, tmp_path, planted_csv):
        path, _ = planted_csv
        config = tmp_path / "bad.toml"
        config.write_text("supprot = 0.2\n", encoding="utf-8")
        code, _, err = run(
            capsys, "mine", "--data", str(path), *DATA_FLAGS,
            "--config", str(config),
        )
        assert code == 2
        assert "unknown key" in err

    def test_malformed_config_exits_2(self, capsys, tmp_path, planted_csv):
        path, _ = planted_csv
        config = tmp_path / "bad.toml"
        config.write_text("= nope", encoding="utf-8")
        code, _, err = run(
            capsys, "mine", "--data", str(path), *DATA_FLAGS,
            "--config", str(config),
        )
        assert code == 2

    def test_cv_config_echo_shows_effective_values(self, capsys, tmp_path, planted_csv):
        path, _ = planted_csv
        config = tmp_path / "cv.toml"
        config.write_text("repeats = 2\nfolds = 3\nseed = 11\n", encoding="utf-8")
        code, out, _ = run(
            capsys, "cv", "--data", str(path), *DATA_FLAGS,
            "--config", str(config), "--seed", "99",
            "--support", "0.05", "--max-len", "2",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["config"]["repeats"] == 2
        assert doc["config"]["folds"] == 3
        assert doc["config"]["seed"] == 99


class TestCv:
    def test_cv_report_shape(self, capsys, planted_csv):
        path, _ = planted_csv
        code, out, err = run(
            capsys, "cv", "--data", str(path), *DATA_FLAGS,
            "--support", "0.05", "--max-len", "2",
            "--repeats", "2", "--folds", "3", "--seed", "7",
        )
        assert code == 0
        doc = json.loads(out)
        assert len(doc["records"]) == 6
        assert doc["aggregates"]["folds_ok"] + doc["aggregates"]["folds_failed"] == 6
        assert doc["config"]["fold_rng"] == "mt19937-fisher-yates"
        assert "AUC" in err

    def test_cv_roc_out_collects_every_fold(self, capsys, tmp_path, planted_csv):
        path, _ = planted_csv
        roc_path = tmp_path / "folds_roc.csv"
        code, out, _ = run(
            capsys, "cv", "--data", str(path), *DATA_FLAGS,
            "--support", "0.05", "--max-len", "2",
            "--repeats", "1", "--folds", "3", "--seed", "7",
            "--roc-out", str(roc_path),
        )
        assert code == 0
        lines = roc_path.read_text().strip().splitlines()
        assert lines[0] == "repeat,fold,threshold,sensitivity,one_minus_specificity"
        folds_seen = {tuple(line.split(",")[:2]) for line in lines[1:]}
        assert folds_seen == {("0", "0"), ("0", "1"), ("0", "2")}

    def test_cv_byte_identical_across_runs_and_workers(self, capsys, planted_csv):
        path, _ = planted_csv
        argv = [
            "cv", "--data", str(path), *DATA_FLAGS,
            "--support", "0.05", "--max-len", "2",
            "--repeats", "1", "--folds", "3", "--seed", "3",
        ]
        outputs = []
        for workers in ("1", "1", "2"):
            code, out, _ = run(capsys, *argv, "--workers", workers)
            assert code == 0
            outputs.append(out)
        assert outputs[0] == outputs[1] == outputs[2]
