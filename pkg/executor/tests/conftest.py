import time

SESSION_STARTED = time.monotonic()

_RESULTS: dict[str, str] = {}

_CRITERIA = {
    "test_golden.py": "executor-golden-suite",
    "test_envelopes.py": "envelope-shape-property",
    "test_server.py": "wire-protocol-conformance",
}


def pytest_runtest_logreport(report):
    for filename, criterion in _CRITERIA.items():
        if filename in report.nodeid:
            if report.when == "call" and not report.passed:
                _RESULTS[criterion] = "FAIL"
            elif report.when == "call":
                _RESULTS.setdefault(criterion, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in _CRITERIA.values():
        if criterion in _RESULTS:
            terminalreporter.write_line(f"ACCEPTANCE {criterion}: {_RESULTS[criterion]}")
