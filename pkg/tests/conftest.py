"""Shared fixtures and the acceptance-summary table."""

import numpy as np
import pytest

import oseenlab as ol

ACCEPTANCE_RESULTS = []


def record_criterion(number: int, description: str, passed: bool, detail: str = ""):
    ACCEPTANCE_RESULTS.append((number, description, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, description, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:2d} [{status}] {description}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_grid():
    return ol.build_grid(1.0, np.log(64.0), 64, 32)


@pytest.fixture(scope="session")
def medium_grid():
    return ol.build_grid(1.0, np.log(64.0), 96, 64)


@pytest.fixture(scope="session")
def two_blobs():
    return ol.BlobSpec((ol.Blob((6.0, 0.0), 1.0, 1.0),
                        ol.Blob((-6.0, 0.0), 1.0, -1.0)))
