from __future__ import annotations

import pytest

CRITERIA = {
    1: "FN fixed points",
    2: "FN implicit branch",
    3: "FN flow step",
    4: "Picard vs Taylor",
    5: "Inclusion-property suite",
    6: "Rounded-arithmetic sandwich",
    7: "Interval-extension dependency example",
    8: "AD correctness",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): test belongs to acceptance criterion n")


def pytest_runtest_logreport(report):
    number = getattr(report, "criterion", None)
    if number is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(number, []).append(report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number, name in CRITERIA.items():
        results = _outcomes.get(number)
        if results is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number} ({name}): {status}")
