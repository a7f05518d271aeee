import math

import numpy as np
import pytest

from gevreylab.equations import EquationSpec
from gevreylab.spectral import GridSpec

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def grid():
    return GridSpec(64, 2 * math.pi)


@pytest.fixture
def mkdv():
    return EquationSpec.mkdv(-1)


@pytest.fixture
def tnls():
    return EquationSpec.tnls(1.0, 1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
