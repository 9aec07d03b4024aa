import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catenoid_lab import darboux
from catenoid_lab.geometry import Geometry, RadialGrid
from catenoid_lab.operators import cutoff


@pytest.fixture(scope="module")
def ctx(geo):
    return darboux.DarbouxContext.build(geo)


def test_kernel_is_annihilated(geo):
    out = darboux.apply_sector(geo.modes.nu0, 1, geo)
    assert np.max(np.abs(out)) < 1e-13


def test_other_sectors_untouched(geo, rng):
    u = rng.normal(size=geo.rho.size)
    np.testing.assert_array_equal(darboux.apply_sector(u, 2, geo), u)
    out = darboux.apply({(1, 0): geo.modes.nu0, (0, 0): u}, geo)
    np.testing.assert_array_equal(out[(0, 0)], u)


@settings(max_examples=15, deadline=None)
@given(c=st.floats(-8, 8), width=st.floats(0.8, 3.0), amp=st.floats(-2, 2))
def test_invert_recovers_field(geo, c, width, amp):
    phi = np.exp(-(((geo.rho - c) / width) ** 2)) + amp * geo.modes.nu0
    Z0 = cutoff(geo.rho, 8.0) * geo.modes.nu0
    datum = float(np.sum(phi * Z0 * geo.weight) * geo.h)
    back = darboux.invert(darboux.apply_sector(phi, 1, geo), datum, geo, 8.0)
    assert np.max(np.abs(back - phi)) < 0.05 * np.max(np.abs(phi)) + 1e-2


def test_invert_is_second_order():
    errs = []
    for h in (0.1, 0.05):
        geo = Geometry.build(RadialGrid.from_spacing(30.0, h))
        phi = np.exp(-((geo.rho - 1.0) ** 2))
        Z0 = cutoff(geo.rho, 8.0) * geo.modes.nu0
        datum = float(np.sum(phi * Z0 * geo.weight) * geo.h)
        errs.append(np.max(np.abs(darboux.invert(darboux.apply_sector(phi, 1, geo), datum, geo, 8.0) - phi)))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.15)


def test_D_star_is_adjoint(ctx, rng):
    n = ctx.geometry.rho.size
    phi = rng.normal(size=n)
    phi[[0, -1]] = 0.0
    psi = rng.normal(size=n - 1)
    lhs = np.dot(ctx.D(phi), psi)
    rhs = np.dot(phi, ctx.D_star(psi))
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_factorization_defect_small(ctx, geo):
    samples = [np.exp(-(((geo.rho - c) / 1.5) ** 2)) for c in (-3.0, 0.0, 2.0)]
    assert darboux.factorization_check(ctx, samples) < 0.05


def test_transformed_operator_has_no_positive_eigenvalue(ctx):
    spec = darboux.transformed_operator(ctx, window=(10.0, 30.0))
    assert spec.positive_count == 0
    assert spec.symmetry_defect < 1e-12
    assert math.isfinite(spec.vtilde_decay_constant)


def test_transformed_potential_vanishes_to_round_off():
    for h in (0.1, 0.05):
        c = darboux.DarbouxContext.build(Geometry.build(RadialGrid.from_spacing(20.0, h)))
        assert np.nanmax(np.abs(c.transformed_potential)) < 1e-10
