from __future__ import annotations

import pytest

# One line per acceptance criterion, filled in by tests/test_acceptance.py.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    def _record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
