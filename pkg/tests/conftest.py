import json
import os
import sys

import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].removeprefix("test_").replace("_", "-")
    if report.when == "call":
        _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.failed:
        _ACCEPTANCE_RESULTS[name] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"ACCEPTANCE {name}: {outcome}")

STUB_BASE = (sys.executable, "-m", "tirforge.testing.stub_executor")


def stub_command(*extra: str) -> tuple[str, ...]:
    return STUB_BASE + extra


@pytest.fixture
def fixtures_dir() -> str:
    return FIXTURES


@pytest.fixture
def echo_pool():
    from tirforge.bridge import LaunchSpec, start_pool

    pool = start_pool(1, LaunchSpec(stub_command("--mode", "echo")))
    yield pool
    pool.shutdown()


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path
