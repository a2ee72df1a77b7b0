"""Shared fixtures and the acceptance-criteria summary printed after the run."""

from __future__ import annotations

import numpy as np
import pytest

from mdshapley import build_model

# Populated by tests/test_acceptance.py: number -> (description, passed, detail).
ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


def record_criterion(number: int, description: str, failures: list[str]) -> None:
    ACCEPTANCE_RESULTS[number] = (description, not failures, "; ".join(failures))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        description, ok, detail = ACCEPTANCE_RESULTS[number]
        line = f"criterion {number:2d} ({description}): {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)


@pytest.fixture
def example_model():
    """The five-dimensional equicorrelation model used by the worked examples."""
    sigma = np.full((5, 5), 0.9)
    np.fill_diagonal(sigma, 1.0)
    return build_model(np.zeros(5), sigma)


@pytest.fixture
def example_x():
    return np.array([0.0, 1.0, 2.0, 2.2, 2.5])
