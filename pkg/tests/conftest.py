"""Collects the acceptance verdicts and prints them after the run."""

import pytest

VERDICTS = []


@pytest.fixture
def verdict():
    """Record one criterion line: ``verdict(number, title, passed, detail)``."""

    def record(number, title, passed, detail=""):
        line = f"CRITERION {number:>2} {'PASS' if passed else 'FAIL'}  {title}  {detail}".rstrip()
        VERDICTS.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(VERDICTS):
            terminalreporter.write_line(line)
