import pathlib
import sys

import pytest

from t2tfaith.corpus import parse_instance

DATA = pathlib.Path(__file__).parent / "data"
sys.path.insert(0, str(pathlib.Path(__file__).parent))

_criteria = {}
_outcomes = {}


def load_jsonl(name):
    with open(DATA / name, encoding="utf-8") as fh:
        return [parse_instance(line) for line in fh if line.strip()]


@pytest.fixture
def fixture_a():
    return load_jsonl("fixture_a.jsonl")[0]


@pytest.fixture
def data_dir():
    return DATA


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            _criteria[item.nodeid] = (mark.args[0], item.name)


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    if report.when == "call" or report.outcome != "passed":
        if report.nodeid not in _outcomes or report.outcome != "passed":
            _outcomes[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (number, name) in sorted(_criteria.items(), key=lambda kv: (kv[1][0], kv[0])):
        outcome = _outcomes.get(nodeid, "not run")
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome)
        terminalreporter.write_line(f"criterion {number}: {label}  {name}")
