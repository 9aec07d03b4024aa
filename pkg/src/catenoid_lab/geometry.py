"""Catenoid profile and the radial coefficients the operators read from it.

All quantities live on a uniform grid in the polar coordinate rho of the
three-dimensional catenoid in R^4.  Everything that has a closed form in
terms of ``<rho> = sqrt(1 + rho^2)`` is evaluated from it; only the axial
coordinate Z(rho) and the plane half-separation S need quadrature.

Note on S: integrating the profile ODE once gives ``f'^2 = f^4 - 1``, hence
``S = int_1^inf df / sqrt(f^4 - 1) = 1.31102877...``.  The same integral with
``f^4 + 1`` under the root (0.92703733...) is also computed and carried
along as ``S_alt`` for comparison; it is not used anywhere downstream.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

__all__ = [
    "RadialGrid",
    "CatenoidProfile",
    "MetricData",
    "PotentialData",
    "SpecialModes",
    "Geometry",
    "QuadratureError",
    "japanese",
    "solve_profile",
    "metric_data",
    "potential",
    "special_modes",
    "plane_separation",
    "axial_coordinate",
]

S_QUAD_RTOL = 1e-10
# split point for the improper integral; beyond it the integrand is expanded
# in powers of f^-4
_S_SPLIT = 8.0


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


def japanese(rho):
    """<rho> = sqrt(1 + rho^2)."""
    return np.sqrt(1.0 + np.square(rho))


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid on [-rho_max, rho_max] with rho = 0 as the middle node.

    Nodes are stored as ``k * h`` for integer ``k`` so that two grids with the
    same spacing share bit-identical node coordinates.
    """

    rho_max: float
    n_points: int

    def __post_init__(self):
        if not self.rho_max > 0:
            raise ValueError(f"rho_max must be positive, got {self.rho_max}")
        if self.n_points < 33 or self.n_points % 2 == 0:
            raise ValueError(f"n_points must be odd and >= 33, got {self.n_points}")

    @classmethod
    def from_spacing(cls, rho_max: float, h: float) -> "RadialGrid":
        half = int(round(rho_max / h))
        if not np.isclose(half * h, rho_max, rtol=1e-12, atol=0.0):
            raise ValueError(f"rho_max={rho_max} is not a multiple of h={h}")
        return cls(float(rho_max), 2 * half + 1)

    @property
    def half(self) -> int:
        return (self.n_points - 1) // 2

    @property
    def spacing(self) -> float:
        return 2.0 * self.rho_max / (self.n_points - 1)

    h = spacing

    @cached_property
    def rho(self) -> np.ndarray:
        k = np.arange(-self.half, self.half + 1, dtype=float)
        return k * self.spacing

    @cached_property
    def midpoints(self) -> np.ndarray:
        """rho at the n-1 cell midpoints (k + 1/2) h."""
        k = np.arange(-self.half, self.half, dtype=float) + 0.5
        return k * self.spacing

    @property
    def center(self) -> int:
        return self.half

    def coarsen(self) -> "RadialGrid":
        """Grid with twice the spacing on the same interval."""
        if self.half % 2:
            raise ValueError("grid cannot be coarsened: (n_points - 1) / 2 is odd")
        return RadialGrid(self.rho_max, self.half + 1)

    def refine(self) -> "RadialGrid":
        return RadialGrid(self.rho_max, 2 * self.n_points - 1)

    def interior(self) -> slice:
        return slice(1, self.n_points - 1)


def _z_prime(rho):
    b = japanese(rho)
    return 1.0 / (b * np.sqrt(b * b + 1.0))


def _tail_series(F: float) -> float:
    # int_F^inf f^-2 (1 - f^-4)^(-1/2) df, binomial series in f^-4
    total, coeff, n = 0.0, 1.0, 0
    while True:
        term = coeff / ((4 * n + 1) * F ** (4 * n + 1))
        total += term
        if term < 1e-18:
            return total
        coeff *= (2 * n + 1) / (2 * n + 2)
        n += 1


def plane_separation(radicand_sign: int = -1) -> float:
    """S = int_1^inf df / sqrt(f^4 + radicand_sign).

    ``radicand_sign=-1`` is the value consistent with the profile ODE.
    """
    if radicand_sign == -1:
        # integrand = (f-1)^(-1/2) / sqrt((f+1)(f^2+1)); 'alg' weight handles the endpoint
        val, err = integrate.quad(
            lambda f: 1.0 / np.sqrt((f + 1.0) * (f * f + 1.0)),
            1.0, _S_SPLIT, weight="alg", wvar=(-0.5, 0.0),
            epsabs=0.0, epsrel=S_QUAD_RTOL, limit=200,
        )
        tail = _tail_series(_S_SPLIT)
    elif radicand_sign == 1:
        val, err = integrate.quad(
            lambda f: 1.0 / np.sqrt(f ** 4 + 1.0), 1.0, _S_SPLIT,
            epsabs=0.0, epsrel=S_QUAD_RTOL, limit=200,
        )
        # f^-2 (1 + f^-4)^(-1/2): alternating version of the same series
        tail, coeff, n = 0.0, 1.0, 0
        while abs(coeff) / _S_SPLIT ** (4 * n + 1) > 1e-18:
            tail += coeff / ((4 * n + 1) * _S_SPLIT ** (4 * n + 1))
            coeff *= -(2 * n + 1) / (2 * n + 2)
            n += 1
    else:
        raise ValueError("radicand_sign must be +1 or -1")
    if err > 10 * S_QUAD_RTOL * abs(val):
        raise QuadratureError(f"S quadrature error estimate {err:.3e} too large")
    return val + tail


def axial_coordinate(grid: RadialGrid, order: str = "trapezoid") -> np.ndarray:
    """Z(rho) = sgn(rho) f^{-1}(<rho>) by cumulative quadrature of Z'.

    ``order="trapezoid"`` is second order in h; ``order="gauss"`` uses a
    5-point Gauss-Legendre rule per cell (error far below round-off for the
    grids used here).  Both are odd in rho by construction.
    """
    h = grid.spacing
    half = grid.half
    if order == "trapezoid":
        zp = _z_prime(grid.rho[half:])
        cells = 0.5 * h * (zp[1:] + zp[:-1])
    elif order == "gauss":
        x, wts = np.polynomial.legendre.leggauss(5)
        left = grid.rho[half:-1]
        pts = left[:, None] + 0.5 * h * (x[None, :] + 1.0)
        cells = 0.5 * h * (_z_prime(pts) @ wts)
    else:
        raise ValueError(f"unknown quadrature order {order!r}")
    pos = np.concatenate([[0.0], np.cumsum(cells)])
    return np.concatenate([-pos[:0:-1], pos])


@dataclass(frozen=True)
class CatenoidProfile:
    grid: RadialGrid
    f_values: np.ndarray
    z_values: np.ndarray
    S: float
    S_alt: float

    def first_integral_residual(self) -> np.ndarray:
        """|f^2 / sqrt(1 + f'^2) - 1| with f' = df/dX^4 and f'^2 = f^4 - 1."""
        f = self.f_values
        fprime2 = f ** 4 - 1.0
        return np.abs(f * f / np.sqrt(1.0 + fprime2) - 1.0)


def solve_profile(grid: RadialGrid) -> CatenoidProfile:
    f = japanese(grid.rho)
    z = axial_coordinate(grid, "trapezoid")
    return CatenoidProfile(grid, f, z, plane_separation(-1), plane_separation(1))


@dataclass(frozen=True)
class MetricData:
    """Radial coefficients of the catenoid metric, angular factor stripped.

    weight = sqrt|g| (volume density), flux = sqrt|g| g^{rho rho}.
    """

    weight: np.ndarray
    flux: np.ndarray
    inv_rho2: np.ndarray
    flux_mid: np.ndarray  # flux at cell midpoints, used by the flux-form stencil

    @property
    def speed2(self) -> np.ndarray:
        return self.flux / self.weight


def _weight(rho):
    b = japanese(rho)
    return b ** 3 / np.sqrt(1.0 + b * b)


def _flux(rho):
    b = japanese(rho)
    return b * np.sqrt(1.0 + b * b)


def metric_data(grid: RadialGrid) -> MetricData:
    rho = grid.rho
    return MetricData(
        weight=_weight(rho),
        flux=_flux(rho),
        inv_rho2=1.0 / (1.0 + rho * rho),
        flux_mid=_flux(grid.midpoints),
    )


@dataclass(frozen=True)
class PotentialData:
    values: np.ndarray


def principal_curvature(rho):
    """Azimuthal principal curvature 1 / (f sqrt(1 + f'^2)) = <rho>^-3."""
    f = japanese(rho)
    return 1.0 / (f * np.sqrt(1.0 + (f ** 4 - 1.0)))


def potential(grid: RadialGrid) -> PotentialData:
    # minimal: meridian curvature is -2 k2, so |II|^2 = 4 k2^2 + 2 k2^2
    k2 = principal_curvature(grid.rho)
    return PotentialData(6.0 * k2 * k2)


@dataclass(frozen=True)
class SpecialModes:
    nu0: np.ndarray
    phi_odd: np.ndarray
    phi_even: np.ndarray
    z_prime: np.ndarray


def special_modes(grid: RadialGrid, z: np.ndarray | None = None) -> SpecialModes:
    """Translation zero mode, axial translation mode and scaling mode.

    ``z`` defaults to the high-order quadrature of Z so that phi_even carries
    no quadrature error into kernel-residual checks.
    """
    rho = grid.rho
    b = japanese(rho)
    s = np.sqrt(b * b + 1.0)
    if z is None:
        z = axial_coordinate(grid, "gauss")
    zp = 1.0 / (b * s)
    phi_even = (b * zp - rho / b * z) / (zp / b ** 2 + rho ** 2 * s / b ** 3)
    return SpecialModes(
        nu0=1.0 / (b * b),
        phi_odd=rho * s / (b * b),
        phi_even=phi_even,
        z_prime=zp,
    )


@dataclass(frozen=True)
class Geometry:
    """Everything the operators need, built once per grid."""

    grid: RadialGrid
    profile: CatenoidProfile = field(repr=False)
    metric: MetricData = field(repr=False)
    potential: PotentialData = field(repr=False)
    modes: SpecialModes = field(repr=False)

    @classmethod
    def build(cls, grid: RadialGrid) -> "Geometry":
        return cls(grid, solve_profile(grid), metric_data(grid), potential(grid), special_modes(grid))

    @property
    def rho(self) -> np.ndarray:
        return self.grid.rho

    @property
    def h(self) -> float:
        return self.grid.spacing

    @property
    def weight(self) -> np.ndarray:
        return self.metric.weight

    @property
    def V(self) -> np.ndarray:
        return self.potential.values
