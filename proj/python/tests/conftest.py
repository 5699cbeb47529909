import json
import os
import pathlib
import sys

import pytest

_pkg = os.environ.get("WOLFBENCH_PYTHON_PKG")
if _pkg:
    sys.path.insert(0, _pkg)

ROOT = pathlib.Path(__file__).resolve().parents[2]

TINY = {
    "version": 1,
    "space": {"L": 2, "masked": False},
    "distance": "hamming",
    "users": [
        {"id": "u1", "reference": "0",
         "noise": {"kind": "explicit-table", "params": {"table": {"0": 0.7, "1": 0.3}}}},
        {"id": "u2", "reference": "3",
         "noise": {"kind": "explicit-table", "params": {"table": {"3": 0.6, "2": 0.4}}}},
    ],
}


@pytest.fixture
def tiny():
    return json.loads(json.dumps(TINY))


@pytest.fixture(scope="session")
def schema():
    with open(ROOT / "docs" / "eval_report.schema.json") as f:
        return json.load(f)


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("WOLFBENCH_CLI")
    if not path:
        pytest.skip("WOLFBENCH_CLI not set")
    return path
