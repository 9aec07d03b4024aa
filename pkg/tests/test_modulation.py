import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catenoid_lab.modulation import (
    TRANSLATION_SECTORS,
    FirstOrderVector,
    SectorMismatch,
    ZVectors,
    apply_M,
    d_limit_oracle,
    d_matrix,
    d_richardson,
    generalized_kernel_residuals,
    pair,
    project_kernel,
    project_unstable,
    remove_unstable,
)
from catenoid_lab.operators import assemble

arrays_seed = st.integers(0, 2 ** 31)


def _rand(geo, seed, sector=(1, 0)):
    r = np.random.default_rng(seed)
    return FirstOrderVector(r.normal(size=geo.rho.size), r.normal(size=geo.rho.size), sector)


@settings(max_examples=30, deadline=None)
@given(arrays_seed, arrays_seed)
def test_pairing_antisymmetric_exactly(geo, s1, s2):
    u, v = _rand(geo, s1), _rand(geo, s2)
    assert pair(u, v, geo.h) == -pair(v, u, geo.h)
    assert pair(u, u, geo.h) == 0.0


def test_sector_mismatch(geo):
    with pytest.raises(SectorMismatch):
        pair(_rand(geo, 0, (1, 0)), _rand(geo, 1, (1, 1)), geo.h)


def test_velocity_roundtrip(geo, rng):
    psi, v = rng.normal(size=(2, geo.rho.size))
    u = FirstOrderVector.from_velocity(psi, v, geo, (0, 0))
    np.testing.assert_allclose(u.velocity(geo), v, rtol=1e-15)


def test_z_plus_minus_normalised(zv):
    assert pair(zv.Zplus, zv.Zminus, zv.h) == pytest.approx(1.0, abs=1e-13)
    assert pair(zv.Zplus, zv.Zplus, zv.h) == 0.0


def test_project_unstable_reads_coefficients(zv):
    u = 0.7 * zv.Zplus + (-0.3) * zv.Zminus
    ap, am = project_unstable(u, zv)
    assert ap == pytest.approx(0.7, abs=1e-12)
    assert am == pytest.approx(-0.3, abs=1e-12)
    ap, am = project_unstable(remove_unstable(u, zv), zv)
    assert abs(ap) < 1e-12 and abs(am) < 1e-12


@settings(max_examples=10, deadline=None)
@given(arrays_seed, st.sampled_from(TRANSLATION_SECTORS))
def test_project_kernel_kills_pairings(zv, seed, sector):
    u = _rand(zv.geometry, seed, sector)
    p = project_kernel(u, zv)
    om = zv.omega({sector: p})
    assert np.max(np.abs(om)) < 1e-9 * (1 + np.max(np.abs(zv.omega({sector: u}))))


def test_M_maps_Z_plus_to_mu_Z_plus_inside_cutoff(zv):
    op = assemble(0, zv.geometry)
    MZ = apply_M(zv.Zplus, op)
    inner = np.abs(zv.geometry.rho) < zv.R_ctf - 1
    np.testing.assert_allclose(MZ.psi[inner], zv.mu * zv.Zplus.psi[inner], rtol=1e-10)


def test_d_matrix_diagonal_negative(geo, unstable):
    mu, phi = unstable
    d = d_matrix(ZVectors.build(geo, 16.0, mu, phi))
    assert np.all(np.diag(d) < 0)
    assert np.all(d - np.diag(np.diag(d)) == 0.0)
    assert len(set(np.diag(d))) == 1


def test_d_matrix_needs_large_cutoff(geo, unstable):
    mu, phi = unstable
    with pytest.raises(ValueError):
        d_matrix(ZVectors.build(geo, 2.0, mu, phi))


def test_zvectors_reject_oversized_cutoff(geo, unstable):
    mu, phi = unstable
    with pytest.raises(ValueError):
        ZVectors.build(geo, 30.0, mu, phi)


def test_d_richardson_exact_on_model():
    vals = {R: -5.0 + 2.0 / R - 7.0 / R ** 3 for R in (8.0, 16.0, 32.0)}
    assert d_richardson(vals) == pytest.approx(-5.0, rel=1e-13)
    with pytest.raises(ValueError):
        d_richardson({8.0: 1.0, 12.0: 1.0, 32.0: 1.0})


def test_d_limit_oracle_value():
    assert d_limit_oracle(1.3110287771461) == pytest.approx(-(8 * math.pi / 3) * 1.3110287771461)


def test_kernel_gram_matches_pairing(zv):
    assert zv.kernel_gram() > 0
    assert pair(zv.Z[0], zv.Z[3], zv.h) == pytest.approx(-zv.kernel_gram())


def test_generalized_kernel_residuals(zv):
    full = generalized_kernel_residuals(zv, truncated=False)
    trunc = generalized_kernel_residuals(zv, truncated=True)
    assert full["M_phi"] < 0.02
    lo, hi = trunc["support"]
    assert lo >= zv.R_ctf - 2 * zv.h and hi <= 2 * zv.R_ctf + 2 * zv.h
    assert trunc["commutator_le_star"] > 0
