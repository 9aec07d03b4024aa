"""One test per acceptance criterion at the documented tolerances.

Each result line is also printed in the terminal summary (see conftest.py).
"""
import pytest

from catenoid_lab.acceptance import CRITERIA
from catenoid_lab.config import ExperimentConfig

RESULTS = {}


@pytest.fixture(scope="module")
def cfg():
    return ExperimentConfig().validate()


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(cfg, number):
    res = CRITERIA[number](cfg)
    RESULTS[number] = res
    print(res.line())
    assert res.passed, f"{res.line()}\nmeasured: {res.measured}"
