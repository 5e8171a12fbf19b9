from __future__ import annotations

import json
from pathlib import Path

import pytest

from rulecover import load_csv

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def toy_path() -> Path:
    return DATA_DIR / "toy_17x5.csv"


@pytest.fixture(scope="session")
def toy_ds(toy_path):
    return load_csv(toy_path, label_column="class", positive_label="1")


@pytest.fixture(scope="session")
def reported_rule_metrics() -> dict:
    with open(DATA_DIR / "reported_rule_metrics.json", encoding="utf-8") as fh:
        return json.load(fh)
