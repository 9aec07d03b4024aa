import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catenoid_lab.flat_oracle import (
    OracleSolution,
    SeparableSource,
    TailSource,
    cross_validate,
    dalembert,
    dichotomy_experiment,
    gaussian_source,
    huygens_grid_check,
    impulsive_source,
    ray_exponent,
)


def test_zero_before_source():
    assert dalembert(gaussian_source(), 0.0, 1.0) == 0.0
    assert dalembert(TailSource(3, 3, shift=5.0), 4.0, 1.0) == 0.0


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        dalembert(gaussian_source(), 1.0, -1.0)


def test_tail_source_parameter_checks():
    with pytest.raises(ValueError):
        TailSource(2.5, 3.0)
    with pytest.raises(ValueError):
        TailSource(4.0, 1.0)


def test_constant_source_closed_form():
    # f = 1 for r <= R gives u = t^2 / 2 while t + r <= R
    src = SeparableSource(spatial=lambda r: np.ones_like(r), temporal=lambda t: np.ones_like(t), r_max=10.0,
                          antiderivative=lambda y: 0.5 * y * y)
    for t, r in ((1.0, 0.0), (2.0, 3.0), (3.0, 5.0)):
        assert dalembert(src, t, r) == pytest.approx(0.5 * t * t, rel=1e-10)


def test_closed_and_quadrature_inner_agree():
    a = TailSource(4.0, 2.5)
    b = SeparableSource(spatial=a.spatial, temporal=a.temporal)
    for t, r in ((3.0, 1.0), (7.0, 2.5)):
        assert dalembert(a, t, r) == pytest.approx(dalembert(b, t, r), rel=1e-7)


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0.5, 20.0), r=st.floats(0.0, 10.0))
def test_r0_limit_continuous(t, r):
    src = gaussian_source()
    if r < 1e-3:
        near = dalembert(src, t, 1e-4)
        assert dalembert(src, t, 0.0) == pytest.approx(near, rel=1e-3, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(t=st.floats(6.5, 60.0), r=st.floats(0.0, 3.0))
def test_huygens_silence_is_exact(t, r):
    # signals from the support r <= 2, t <= 1 have left every r < t - 3
    assert dalembert(impulsive_source(), t, r) == 0.0


def test_huygens_grid_below_floor():
    hg = huygens_grid_check()
    assert hg["oracle"] == 0.0
    assert hg["value"] < hg["floor"]


def test_dichotomy_borderline_exponent():
    fits = dichotomy_experiment(3.0, 3.0, probes=(1.0,), n=12)
    assert fits[1.0].exponent == pytest.approx(-2.0, abs=0.15)


def test_ray_decay_faster_than_three_halves():
    assert ray_exponent(4.0, 2.5, n=12).exponent <= -1.5


def test_cross_validation_second_order():
    cv = cross_validate(spacings=(0.1, 0.05), T=10.0, probes=(1.0,))
    assert cv.orders[0] == pytest.approx(2.0, abs=0.1)


def test_oracle_solution_wrapper():
    sol = OracleSolution(gaussian_source())
    assert sol(5.0, 1.0) == dalembert(gaussian_source(), 5.0, 1.0)
    assert math.isfinite(sol(5.0, 1.0))
