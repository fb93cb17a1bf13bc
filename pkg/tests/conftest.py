"""Shared test fixtures and the acceptance-summary reporter."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Recorder for one PASS/FAIL line per acceptance criterion."""

    def record(criterion: int, passed: bool, detail: str) -> bool:
        verdict = "PASS" if passed else "FAIL"
        _ACCEPTANCE_LINES.append(f"criterion {criterion}: {verdict} - {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
