"""Symplectic bookkeeping of the first-order formulation at zero boost.

The momentum is psidot = -sqrt|g| d_t psi, the pairing is
Omega(u, v) = int (u vdot - udot v) drho (angular integral 1 for orthonormal
harmonics) and the flow reads d_t (psi, psidot) = M (psi, psidot) with
M = [[0, -1/w], [-w H, 0]].

In this convention Z_+ = c (chi phi_mu, -mu w chi phi_mu) carries
d_t psi = +mu psi, so Z_+ is the growing direction and
M Z_pm = pm mu Z_pm + (cutoff errors).

Translation modes live in the three ell = 1 sectors keyed (1, i), i = 0, 1, 2,
one per Cartesian direction.  Their radial coefficient is
sqrt(4 pi / 3) nu0, the normalisation of Theta^i in L^2(S^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Geometry
from .operators import SectorOperator, angular_factor, assemble, cutoff

__all__ = [
    "FirstOrderVector",
    "ZVectors",
    "ModulationRecord",
    "SectorMismatch",
    "SingularDMatrix",
    "pair",
    "project_unstable",
    "project_kernel",
    "remove_unstable",
    "d_richardson",
    "d_matrix",
    "d_limit_oracle",
    "generalized_kernel_residuals",
    "apply_M",
    "TRANSLATION_SECTORS",
]

TRANSLATION_SECTORS = ((1, 0), (1, 1), (1, 2))
UNSTABLE_SECTOR = (0, 0)


class SectorMismatch(ValueError):
    pass


class SingularDMatrix(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class FirstOrderVector:
    psi: np.ndarray
    psidot: np.ndarray
    sector: tuple

    @classmethod
    def from_velocity(cls, psi, v, geometry: Geometry, sector) -> "FirstOrderVector":
        return cls(np.asarray(psi, dtype=float), -geometry.weight * np.asarray(v, dtype=float), tuple(sector))

    def velocity(self, geometry: Geometry) -> np.ndarray:
        return -self.psidot / geometry.weight

    def __add__(self, other):
        _check(self, other)
        return FirstOrderVector(self.psi + other.psi, self.psidot + other.psidot, self.sector)

    def __sub__(self, other):
        _check(self, other)
        return FirstOrderVector(self.psi - other.psi, self.psidot - other.psidot, self.sector)

    def __mul__(self, c: float):
        return FirstOrderVector(c * self.psi, c * self.psidot, self.sector)

    __rmul__ = __mul__


def _check(u: FirstOrderVector, v: FirstOrderVector):
    if u.sector != v.sector:
        raise SectorMismatch(f"sectors {u.sector} and {v.sector} differ")
    if u.psi.shape != v.psi.shape:
        raise SectorMismatch("vectors live on different grids")


def pair(u: FirstOrderVector, v: FirstOrderVector, h: float) -> float:
    """Omega(u, v); end nodes vanish so the plain sum is the trapezoid rule."""
    _check(u, v)
    return float(np.dot(u.psi, v.psidot) - np.dot(u.psidot, v.psi)) * h


def apply_M(u: FirstOrderVector, op: SectorOperator) -> FirstOrderVector:
    w = op.weight
    return FirstOrderVector(-u.psidot / w, -w * op.apply(u.psi), u.sector)


@dataclass(frozen=True)
class ZVectors:
    R_ctf: float
    geometry: Geometry = field(repr=False)
    chi: np.ndarray = field(repr=False)
    Z: tuple = field(repr=False)  # Z1..Z6
    Zplus: FirstOrderVector = field(repr=False)
    Zminus: FirstOrderVector = field(repr=False)
    mu: float = 0.0
    phi_mu: np.ndarray = field(default=None, repr=False)
    c_pm: float = 0.0

    @classmethod
    def build(cls, geometry: Geometry, R_ctf: float, mu: float, phi_mu: np.ndarray) -> "ZVectors":
        """``phi_mu`` is the w-normalised eigenfunction (any discretisation)."""
        if R_ctf <= 0:
            raise ValueError("R_ctf must be positive")
        if 2 * R_ctf > geometry.grid.rho_max:
            raise ValueError(f"2 R_ctf = {2 * R_ctf} exceeds rho_max = {geometry.grid.rho_max}")
        w, h = geometry.weight, geometry.h
        chi = cutoff(geometry.rho, R_ctf)
        nu = angular_factor(1) * geometry.modes.nu0 * chi
        zero = np.zeros_like(nu)
        Z = tuple(FirstOrderVector(nu, zero, s) for s in TRANSLATION_SECTORS) + tuple(
            FirstOrderVector(zero, -w * nu, s) for s in TRANSLATION_SECTORS
        )
        f = chi * phi_mu
        c = 1.0 / math.sqrt(2.0 * mu * float(np.sum(f * f * w) * h))
        zp = FirstOrderVector(c * f, -mu * c * w * f, UNSTABLE_SECTOR)
        zm = FirstOrderVector(c * f, mu * c * w * f, UNSTABLE_SECTOR)
        return cls(R_ctf, geometry, chi, Z, zp, zm, mu, phi_mu, c)

    @property
    def h(self) -> float:
        return self.geometry.h

    def omega(self, vectors: dict) -> np.ndarray:
        """Six pairings Omega(psi, Z_k); ``vectors`` maps sector -> FirstOrderVector."""
        out = np.zeros(6)
        for k, z in enumerate(self.Z):
            u = vectors.get(z.sector)
            if u is not None:
                out[k] = pair(u, z, self.h)
        return out

    def kernel_gram(self) -> float:
        """delta = int chi^2 (nu^i)^2 w, so Omega(Z_i, Z_{3+i}) = -delta."""
        return -pair(self.Z[0], self.Z[3], self.h)


@dataclass(frozen=True)
class ModulationRecord:
    time: float
    a_plus: float
    a_minus: float
    omega: tuple
    d_matrix: tuple

    def row(self) -> list:
        return [self.time, self.a_plus, self.a_minus, *self.omega]


def project_unstable(u: FirstOrderVector, zv: ZVectors) -> tuple[float, float]:
    """(a_plus, a_minus) = (Omega(u, Z_-), -Omega(u, Z_+))."""
    return pair(u, zv.Zminus, zv.h), -pair(u, zv.Zplus, zv.h)


def remove_unstable(u: FirstOrderVector, zv: ZVectors) -> FirstOrderVector:
    ap, am = project_unstable(u, zv)
    return u - ap * zv.Zplus - am * zv.Zminus


def project_kernel(u: FirstOrderVector, zv: ZVectors) -> FirstOrderVector:
    """Remove b Z_i + c Z_{3+i} so both pairings of the result vanish."""
    i = TRANSLATION_SECTORS.index(u.sector)
    zi, z3 = zv.Z[i], zv.Z[3 + i]
    delta = zv.kernel_gram()
    c = pair(u, zi, zv.h) / delta
    b = -pair(u, z3, zv.h) / delta
    return u - b * zi - c * z3


def d_matrix(zv: ZVectors) -> np.ndarray:
    """d_ij = int chi nu^i nu^j sqrt|h| (h^-1)^00 drho domega at zero boost.

    The angular integral of Theta^i Theta^j is (4 pi / 3) delta_ij; the
    orthonormal radial coefficients already carry it.
    """
    if zv.R_ctf < 4:
        raise ValueError("d_matrix needs R_ctf >= 4")
    g = zv.geometry
    d = np.zeros((3, 3))
    for i, si in enumerate(TRANSLATION_SECTORS):
        for j, sj in enumerate(TRANSLATION_SECTORS):
            if si != sj:
                continue  # distinct harmonics are orthogonal on the sphere
            nu = angular_factor(1) * g.modes.nu0
            d[i, j] = -float(np.sum(zv.chi * nu * nu * g.weight) * g.h)
    det = float(np.linalg.det(d))
    if abs(det) < 1e-12:
        raise SingularDMatrix(f"det d = {det:.3e}; increase R_ctf")
    return d


def d_limit_oracle(S: float) -> float:
    """R_ctf -> infinity limit of d_ii: w nu0^2 = Z', so the integral is 2 S."""
    return -(4.0 * math.pi / 3.0) * 2.0 * S


def d_richardson(values: dict) -> float:
    """Extrapolate d_ii(R) sampled at R, 2R, 4R assuming c1/R + c3/R^3 tails."""
    Rs = sorted(values)
    if len(Rs) != 3 or not (np.isclose(Rs[1], 2 * Rs[0]) and np.isclose(Rs[2], 2 * Rs[1])):
        raise ValueError("need d_ii at R, 2R, 4R")
    A = np.array([[1.0, 1.0 / R, 1.0 / R ** 3] for R in Rs])
    return float(np.linalg.solve(A, [values[R] for R in Rs])[0])


def generalized_kernel_residuals(zv: ZVectors, truncated: bool = True) -> dict:
    """||M phi_i||_w-type residuals for phi_i and ||M phi_{3+i} - phi_i||.

    With ``truncated=False`` the untruncated modes are used and the residual
    measures discretisation error only; otherwise it localises where chi' != 0.
    Norms are plain grid L^2 norms of both components.  ``commutator_le_star``
    is the LE* size of the cutoff part [H, chi] nu of M Z_1, and ``support``
    the |rho| range where that part is non-zero.
    """
    from .evolution import le_star_density

    g = zv.geometry
    op = assemble(1, g)
    w = g.weight
    chi = zv.chi if truncated else np.ones_like(zv.chi)
    nu = angular_factor(1) * g.modes.nu0 * chi
    zero = np.zeros_like(nu)
    sl = g.grid.interior()
    phi1 = FirstOrderVector(nu, zero, TRANSLATION_SECTORS[0])
    phi4 = FirstOrderVector(zero, -w * nu, TRANSLATION_SECTORS[0])
    r1 = apply_M(phi1, op)
    r4 = apply_M(phi4, op) - phi1
    norm = lambda u: math.sqrt(float(np.sum(u.psi[sl] ** 2 + (u.psidot[sl] / w[sl]) ** 2) * g.h))  # noqa: E731
    # cutoff-induced part [H, chi] nu: exactly zero where chi is constant across the stencil
    nu_full = angular_factor(1) * g.modes.nu0
    comm = np.zeros_like(nu)
    comm[sl] = op.apply(chi * nu_full)[sl] - chi[sl] * op.apply(nu_full)[sl]
    support = np.abs(g.rho)[comm != 0.0]
    return {
        "M_phi": norm(r1),
        "M_phi3_minus_phi": norm(r4),
        "commutator_le_star": math.sqrt(le_star_density(comm, g)),
        "support": (float(support.min()), float(support.max())) if support.size else (math.nan, math.nan),
    }
