"""Shared fixtures and the acceptance-line reporter.

Each acceptance test records exactly one PASS/FAIL line; the lines are
printed in a summary block at the end of the pytest run so they survive
output capture.
"""

from __future__ import annotations

import numpy as np
import pytest

import freqpde as fp

_ACCEPTANCE_LINES: list[tuple[int, str]] = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} — {detail}"
    _ACCEPTANCE_LINES.append((number, line))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


_CLEAN_CACHE: dict[str, fp.Field] = {}


def clean_solution(name: str) -> fp.Field:
    """Reference solve on the default grid, cached across tests."""
    if name not in _CLEAN_CACHE:
        _CLEAN_CACHE[name] = fp.solve_reference(fp.EQUATIONS[name])
    return _CLEAN_CACHE[name]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
