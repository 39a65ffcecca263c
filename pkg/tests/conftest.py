import pytest

import support

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def app():
    return support.dialog_app()


@pytest.fixture
def efg():
    return support.base_efg()


@pytest.fixture
def extended_efg():
    return support.extended_efg()


@pytest.fixture
def criterion():
    """Record a one-line PASS/FAIL summary for an acceptance criterion."""
    recorded = []

    def record(name: str, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else "")
        recorded.append(line)
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
