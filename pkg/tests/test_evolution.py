import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catenoid_lab.evolution import (
    CFLViolation,
    Evolver,
    SourceSpec,
    compact_bump,
    decay_fit,
    energy_norm2,
    flat_geometry,
    le_density,
    le_pieces,
    rp_energy,
)
from catenoid_lab.geometry import Geometry, RadialGrid


@pytest.fixture(scope="module")
def small():
    return Geometry.build(RadialGrid.from_spacing(30.0, 0.05))


def _run(geo, dt, T, ell=2, sources=None):
    p = compact_bump(geo.rho, 1.0, 3.0)
    ev = Evolver(geo, dt, sources)
    st_ = ev.initial_state({(ell, 0): (p, np.zeros_like(p))})
    for _ in range(int(round(T / dt))):
        ev.step(st_)
    return ev, st_


def test_cfl_enforced(small):
    with pytest.raises(CFLViolation):
        Evolver(small, 0.05)
    Evolver(small, 0.05 / math.sqrt(2))


@pytest.mark.parametrize("ell", [0, 1, 2, 3])
def test_modified_energy_conserved(small, ell):
    p = compact_bump(small.rho, 0.5, 2.0)
    ev = Evolver(small, 0.02, deflate={0: [ev_phi(small)]} if ell == 0 else None)
    st_ = ev.initial_state({(ell, 0): (p, 0.3 * p)})
    E0 = ev.energy(st_)
    for _ in range(500):
        ev.step(st_)
    assert abs(ev.energy(st_) - E0) <= 1e-12 * abs(E0)


def ev_phi(geo):
    from catenoid_lab.operators import assemble

    return assemble(0, geo).top_eigenpair()[1]


def test_time_is_step_count_times_dt(small):
    _, st_ = _run(small, 0.02, 3.0)
    assert st_.time == 150 * 0.02
    assert st_.step_index == 150


def test_state_copy_is_independent(small):
    ev, st_ = _run(small, 0.02, 0.2)
    c = st_.copy()
    ev.step(st_)
    assert c.time < st_.time
    assert not np.array_equal(c.sectors[(2, 0)][0], st_.sectors[(2, 0)][0])


def test_finite_speed_of_propagation(small):
    # support starts in [-2, 4]; after T=5 nothing beyond 4 + sqrt2 * 5 + stencil slack
    _, st_ = _run(small, 0.02, 5.0)
    psi = st_.sectors[(2, 0)][0]
    far = np.abs(small.rho - 1.0) > 3.0 + math.sqrt(2) * 5.0 + 0.5
    assert np.max(np.abs(psi[far])) < 1e-8


def test_boundary_silence_bitwise():
    out = []
    for R in (20.0, 40.0):
        g = Geometry.build(RadialGrid.from_spacing(R, 0.05))
        _, st_ = _run(g, 0.02, 4.0)
        out.append((g, st_.sectors[(2, 0)][0]))
    (g1, u1), (g2, u2) = out
    off = g2.grid.half - g1.grid.half
    np.testing.assert_array_equal(u1, u2[off: off + g1.grid.n_points])


def test_deflation_removes_growth(small):
    from catenoid_lab.operators import assemble

    phi = assemble(0, small).top_eigenpair()[1]
    p = compact_bump(small.rho, 0.0, 2.0)
    ev = Evolver(small, 0.02, deflate={0: [phi]})
    st_ = ev.initial_state({(0, 0): (p, np.zeros_like(p))})
    for _ in range(1000):
        ev.step(st_)
    assert np.max(np.abs(st_.sectors[(0, 0)][0])) < 10 * np.max(p)


@given(st.sampled_from([("const",), ("japanese", 2.5, 1.0), ("gaussian", 3.0, 1.0), ("bump", 1.0, 2.0)]),
       st.floats(0.0, 10.0))
def test_time_profiles(tag, t):
    s = SourceSpec((0, 0), np.ones(5), tag)
    val = s.time_factor(t)
    assert 0.0 <= val <= 1.0
    if tag[0] == "bump" and not (1.0 < t < 2.0):
        assert val == 0.0
    if tag[0] == "japanese" and t < 1.0:
        assert val == 0.0


def test_source_validation():
    with pytest.raises(ValueError):
        SourceSpec((0, 0), np.ones(3), cutoff=-1.0)
    with pytest.raises(ValueError):
        SourceSpec((0, 0), np.ones(3), kind="weird")


def test_source_drives_flat_solution():
    g = flat_geometry(RadialGrid.from_spacing(20.0, 0.05))
    prof = g.rho * np.exp(-g.rho ** 2)
    src = SourceSpec((0, 0), prof, ("bump", 0.0, 1.0))
    ev = Evolver(g, 0.025, [src])
    st_ = ev.initial_state({(0, 0): (np.zeros_like(g.rho), np.zeros_like(g.rho))})
    for _ in range(40):
        ev.step(st_)
    assert np.max(np.abs(st_.sectors[(0, 0)][0])) > 0


def test_le_pieces_sum_and_positivity(small, rng):
    psi, v = rng.normal(size=(2, small.rho.size))
    pieces = le_pieces(psi, v, 2, small, 0.1)
    total = sum(float(np.sum(x)) for x in pieces.values())
    assert total == pytest.approx(le_density(psi, v, 2, small, 0.1))
    assert all(np.all(x >= 0) for x in pieces.values())
    assert energy_norm2(psi, v, 2, small) > 0


def test_rp_energy_monotone_in_p(small):
    p = compact_bump(small.rho, 15.0, 3.0)
    e = [rp_energy(p, -np.gradient(p, small.h), small, q, 10.0) for q in (0.0, 1.0, 2.0)]
    assert e[0] <= e[1] <= e[2]


def test_decay_fit_recovers_power():
    t = np.geomspace(10, 100, 20)
    fit = decay_fit(t, 3 * t ** -2.5)
    assert fit.exponent == pytest.approx(-2.5, abs=1e-12)
    assert fit.n == 20


@settings(max_examples=20)
@given(st.floats(-4.0, -0.5), st.floats(0.1, 10.0))
def test_decay_fit_property(k, c):
    t = np.geomspace(5, 80, 12)
    assert decay_fit(t, c * t ** k).exponent == pytest.approx(k, abs=1e-9)


def test_decay_fit_rejects_bad_windows():
    t = np.geomspace(10, 20, 20)
    with pytest.raises(ValueError):
        decay_fit(t, t ** -1)
    t = np.geomspace(10, 100, 20)
    with pytest.raises(ValueError):
        decay_fit(t, np.sin(t))
