from pathlib import Path

import pytest

from linkbrush.csvio import load_csv
from linkbrush.table import augment

DEMO_DIR = Path(__file__).resolve().parent.parent / "demo"

_acceptance_results = []


@pytest.fixture
def cars_table():
    return augment(load_csv(DEMO_DIR / "cars.csv"), table_id="cars")


@pytest.fixture
def demo_dir():
    return DEMO_DIR


@pytest.fixture
def counting_listener():
    """Factory for callbacks that record the notices they receive."""

    def make():
        calls = []

        def cb(notice):
            calls.append(notice)

        cb.calls = calls
        return cb

    return make


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "acceptance" in report.keywords:
        _acceptance_results.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_results:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"  [{status}] {name}")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: spec acceptance criterion")
    config.addinivalue_line("markers", "slow: long-running scale test")
