import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

# fixed master seed for every statistical test; never tuned per test
MASTER_SEED = 20240611


@pytest.fixture
def rng():
    return np.random.default_rng(MASTER_SEED)


ACCEPTANCE_LINES = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
