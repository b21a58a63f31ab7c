import numpy as np
import pytest

from conecontact.torus import TorusModel
from helpers import ACCEPTANCE


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def t3():
    return TorusModel(3, 1)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
