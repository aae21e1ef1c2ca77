"""Shared pytest hooks: acceptance criteria report one verdict line each in the terminal summary."""

import pytest

_VERDICTS: dict[int, str] = {}


class Criterion:
    def __init__(self, number: int):
        self.number = number

    def record(self, ok: bool, detail: str) -> None:
        _VERDICTS[self.number] = f"criterion {self.number}: {'PASS' if ok else 'FAIL'} | {detail}"
        assert ok, detail


@pytest.fixture
def criterion(request):
    number = request.node.get_closest_marker("criterion").args[0]
    _VERDICTS.setdefault(number, f"criterion {number}: FAIL | did not complete")
    return Criterion(number)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[n])
