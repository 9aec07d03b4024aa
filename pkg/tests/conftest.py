import math
import sys

import numpy as np
import pytest

from catenoid_lab.geometry import Geometry, RadialGrid
from catenoid_lab.modulation import ZVectors
from catenoid_lab.operators import assemble


@pytest.fixture(scope="session")
def geo():
    return Geometry.build(RadialGrid.from_spacing(40.0, 0.05))


@pytest.fixture(scope="session")
def unstable(geo):
    lam, phi = assemble(0, geo).top_eigenpair()
    return math.sqrt(lam), phi


@pytest.fixture(scope="session")
def zv(geo, unstable):
    mu, phi = unstable
    return ZVectors.build(geo, 8.0, mu, phi)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)



def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k].line())
