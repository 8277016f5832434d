from datetime import timedelta

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=30, deadline=timedelta(seconds=20))
settings.load_profile("default")

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def report():
    """Record (and print) the one-line verdict for an acceptance criterion."""
    def record(number: int, passed: bool, detail: str):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
