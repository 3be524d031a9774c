import pytest

_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for the acceptance summary and return the verdict."""

    def record(number, name, passed, detail):
        _LINES.append((number, f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}  {name}: {detail}"))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES, key=lambda item: item[0]):
        terminalreporter.write_line(line)
