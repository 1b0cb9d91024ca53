import sys

import numpy as np
import pytest

from cohere import qmat
from cohere.sampling import SeededStream


@pytest.fixture
def stream():
    return SeededStream(1234)


@pytest.fixture
def mixed_qubit():
    return np.diag([0.75, 0.25]).astype(complex)


def ket(*amps):
    return qmat.pure_state(amps)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
