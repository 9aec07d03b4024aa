import math

import numpy as np
import pytest

from catenoid_lab.shooting import (
    BracketError,
    DataFamily,
    DegenerateFamily,
    TrapEnvelope,
    analytic_b0,
    classify_directions,
    escape_rate_samples,
    leapfrog_speed,
    random_family,
    run_trial,
    shoot,
)


@pytest.fixture(scope="module")
def report(zv):
    return classify_directions(zv, dt=0.02)


def test_leapfrog_speed_limits():
    assert leapfrog_speed(1.1, 1e-4) == pytest.approx(1.1, rel=1e-8)
    assert leapfrog_speed(1.1, 0.05) > 1.1


def test_growing_direction_is_plus(report, zv):
    assert report.growing == "plus"
    assert report.rate_plus == pytest.approx(zv.mu, rel=1e-3)
    assert report.rate_minus == pytest.approx(-zv.mu, rel=1e-3)


def test_envelope_validation():
    with pytest.raises(ValueError):
        TrapEnvelope(0.0)
    with pytest.raises(ValueError):
        TrapEnvelope(1.0, "exp")
    env = TrapEnvelope(2.0)
    assert env(0.0) == 2.0
    assert env(10.0) == pytest.approx(2.0 * 101 ** -1.5)


def test_shoot_matches_oracle(geo, zv, unstable, report):
    mu, phi = unstable
    fam = random_family(geo, zv, np.random.default_rng(7), report=report)
    out = shoot(fam, zv, (-1.0, 1.0), dt=0.01, T_final=15.0)
    b_or = analytic_b0(fam, phi, mu, geo, 1.0)
    assert abs(out.b0_star - b_or) < 1e-3 * abs(b_or) + 1e-6
    assert out.trapped.exit_side == 0
    sides = [t.exit_side for t in out.trials if t.exit_side != 0]
    assert set(sides) == {-1, 1}
    good, total = escape_rate_samples(out, mu)
    assert total > 0 and good / total >= 0.95


def test_bad_bracket(geo, zv, report):
    fam = random_family(geo, zv, np.random.default_rng(7), report=report)
    b = analytic_b0(fam, zv.phi_mu, zv.mu, geo)
    with pytest.raises(BracketError):
        shoot(fam, zv, (b + 0.5, b + 1.0), dt=0.02, T_final=10.0)


def test_degenerate_family(geo, zv):
    z = np.zeros_like(geo.rho)
    fam = DataFamily(z, z, z, z)
    with pytest.raises(DegenerateFamily):
        analytic_b0(fam, zv.phi_mu, zv.mu, geo)


def test_double_double_trial_agrees_with_double(geo, zv, report):
    fam = random_family(geo, zv, np.random.default_rng(3), report=report)
    env = TrapEnvelope(1e6)
    a = run_trial(fam, 0.1, zv, env, 0.02, 2.0)
    from catenoid_lab.ddarith import dd_scalar

    b = run_trial(fam, dd_scalar(0.1), zv, env, 0.02, 2.0, precision="dd")
    np.testing.assert_allclose(a.a_plus, b.a_plus, rtol=1e-10, atol=1e-14)
    assert math.isfinite(b.b0)
