from __future__ import annotations

import functools

import pytest

from nlse_shoot.problem import Family, ProblemSpec
from nlse_shoot.shoot import find_ground


@functools.lru_cache(maxsize=None)
def ground(family: str, d: int, b: float = 1.0, linear: bool = False):
    """Cached ground states shared between test modules."""
    return find_ground(ProblemSpec(Family(family), d, b, nonlinearity_enabled=not linear))


@pytest.fixture
def snh7():
    return ground("snh", 7)


@pytest.fixture
def gp4():
    return ground("gp", 4)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""

    def emit(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
