import pytest

_LINES = []


@pytest.fixture
def acceptance_log():
    """Record one pass/fail line; all lines are echoed in the terminal summary."""

    def log(tag, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
        _LINES.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
