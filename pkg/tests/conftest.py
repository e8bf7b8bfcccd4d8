import re

import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the lines are printed in the terminal summary."""
    def record(number: int, passed: bool, text: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {text}"
        _CRITERIA.append((number, line))
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda x: x[0]):
        terminalreporter.write_line(line)
    failed = sum(1 for _, line in _CRITERIA if re.search(r": FAIL ", line))
    terminalreporter.write_line(f"{len(_CRITERIA) - failed}/{len(_CRITERIA)} criteria pass")
