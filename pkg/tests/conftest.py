from __future__ import annotations

import pathlib

import pytest

DATA = pathlib.Path(__file__).parent / "data"

# criterion number -> "PASS" / "FAIL", filled in by test_acceptance
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def data_dir() -> pathlib.Path:
    return DATA


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d}: {ACCEPTANCE[n]}")
