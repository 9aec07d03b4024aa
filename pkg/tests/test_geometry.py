import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catenoid_lab.geometry import (
    Geometry,
    RadialGrid,
    axial_coordinate,
    japanese,
    plane_separation,
)

S_REF = 1.3110287771461  # K(1/sqrt 2) / sqrt 2
S_ALT_REF = 0.9270373386507


def test_plane_separation_matches_elliptic_integral():
    assert plane_separation(-1) == pytest.approx(S_REF, rel=1e-12)
    assert plane_separation(1) == pytest.approx(S_ALT_REF, rel=1e-12)


def test_plane_separation_rejects_bad_sign():
    with pytest.raises(ValueError):
        plane_separation(0)


@pytest.mark.parametrize("n", [32, 10, 2402])
def test_grid_rejects_even_or_small(n):
    with pytest.raises(ValueError):
        RadialGrid(10.0, n)


def test_from_spacing_requires_multiple():
    with pytest.raises(ValueError):
        RadialGrid.from_spacing(10.0, 0.3)


@given(half=st.integers(16, 400), rho_max=st.floats(1.0, 100.0))
def test_grid_is_symmetric_with_center_node(half, rho_max):
    g = RadialGrid(rho_max, 2 * half + 1)
    assert g.rho[g.center] == 0.0
    np.testing.assert_array_equal(g.rho, -g.rho[::-1])
    assert g.rho[-1] == pytest.approx(rho_max)


def test_shared_nodes_are_bit_identical():
    small = RadialGrid.from_spacing(20.0, 0.05)
    big = RadialGrid.from_spacing(40.0, 0.05)
    off = big.half - small.half
    np.testing.assert_array_equal(small.rho, big.rho[off: off + small.n_points])


def test_coarsen_refine_roundtrip():
    g = RadialGrid.from_spacing(10.0, 0.05)
    assert g.coarsen().spacing == pytest.approx(0.1)
    assert g.refine().coarsen() == g


def test_first_integral_residual_is_round_off():
    geo = Geometry.build(RadialGrid(60.0, 2401))
    assert np.max(geo.profile.first_integral_residual()) < 1e-10


def test_axial_coordinate_odd_and_bounded():
    g = RadialGrid.from_spacing(50.0, 0.05)
    z = axial_coordinate(g, "gauss")
    np.testing.assert_allclose(z, -z[::-1], atol=0.0)
    assert np.all(np.diff(z) > 0)
    assert z[-1] < S_REF
    # Z -> S like S - 1/rho
    assert S_REF - z[-1] == pytest.approx(1 / 50.0, rel=0.05)


def test_axial_coordinate_is_second_order():
    errs = []
    for h in (0.1, 0.05, 0.025):
        g = RadialGrid.from_spacing(10.0, h)
        errs.append(np.max(np.abs(axial_coordinate(g, "trapezoid") - axial_coordinate(g, "gauss"))))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.1)
    assert np.log2(errs[1] / errs[2]) == pytest.approx(2.0, abs=0.1)


def test_metric_weight_and_potential_closed_forms():
    geo = Geometry.build(RadialGrid.from_spacing(20.0, 0.1))
    b = japanese(geo.rho)
    np.testing.assert_allclose(geo.weight, b ** 3 / np.sqrt(1 + b * b), rtol=1e-14)
    np.testing.assert_allclose(geo.V, 6 * b ** -6, rtol=1e-13)
    # w nu0^2 = Z'
    np.testing.assert_allclose(geo.weight * geo.modes.nu0 ** 2, geo.modes.z_prime, rtol=1e-13)


@settings(max_examples=25)
@given(st.floats(-1e3, 1e3, allow_nan=False))
def test_speed_between_one_and_sqrt2(r):
    geo = Geometry.build(RadialGrid(max(abs(r), 1.0) + 1.0, 33))
    c2 = geo.metric.speed2
    assert np.all((c2 >= 1.0) & (c2 <= 2.0 + 1e-15))
