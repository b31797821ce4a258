import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Collect one pass/fail line per acceptance criterion."""
    def add(number: int, title: str, ok: bool, detail: str, seconds: float):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} [{seconds:.1f} s]"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
