import pytest

_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line: verdict(criterion, ok, detail, seconds)."""
    def record(criterion, ok, detail, seconds):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail} ({seconds:.1f} s)"
        _VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
