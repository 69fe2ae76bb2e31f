import os
import sys

import numpy as np
import pytest

HERE = os.path.dirname(__file__)
sys.path.insert(0, os.path.join(HERE, "oracles"))

# lines appended by test_acceptance, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_tuples(n, seed=0, scale=10.0):
    """(n, 4) array with coordinates scale * u**2, the study distribution."""
    r = np.random.default_rng(seed)
    return scale * r.random((n, 4)) ** 2
