from __future__ import annotations

import sys

import numpy as np
import pytest

from solsurf.laxpair import lax_pair
from solsurf.painleve import PainleveParams, PainleveState, integrate


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def p1_host():
    """P1 solution from x(0) = 1/2, x_t(0) = 0; pole-free on [0, 1.2]."""
    prm = PainleveParams("P1")
    return integrate(prm, PainleveState(0.0, 0.5, 0.0), 1.2)


@pytest.fixture(scope="session")
def p1_pair():
    return lax_pair(PainleveParams("P1"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
