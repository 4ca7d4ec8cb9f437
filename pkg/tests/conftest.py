import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest

from partmoo.benchmarks import branin_currin, gen_synthetic_nas

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def synthetic():
    return gen_synthetic_nas(0)


@pytest.fixture(scope="session")
def bc():
    return branin_currin()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
