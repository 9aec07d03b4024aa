"""Radial sector operators H_ell, their spectra, and dyadic weighted norms.

H_ell u = w^-1 (a u')' - ell(ell+1) <rho>^-2 u + V u, discretised in flux form
with the flux ``a`` sampled at cell midpoints.  The discrete operator is
self-adjoint for <u, v>_w = sum(u v w h) and carries Dirichlet rows at the two
end nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy import integrate, linalg, optimize

from .geometry import Geometry, RadialGrid

__all__ = [
    "SectorOperator",
    "SpectrumReport",
    "WeightedNorm",
    "SpectrumMismatch",
    "assemble",
    "eigen_unstable",
    "shooting_mu2",
    "positive_count",
    "dyadic_shells",
    "weighted_norm",
    "coercivity_probe",
    "cutoff",
    "angular_factor",
]

POSITIVE_TOL = 1e-6


class SpectrumMismatch(RuntimeError):
    """Matrix and shooting eigenvalues disagree; the grid is under-resolved."""


def angular_factor(ell: int) -> float:
    """L^2(S^2) norm of the coordinate harmonic Theta^i (ell=1) or of 1 (ell=0).

    Radial profiles are coefficients of orthonormal real harmonics; this factor
    converts the unnormalised angular functions 1 and Theta^i to that convention.
    """
    if ell == 0:
        return math.sqrt(4.0 * math.pi)
    if ell == 1:
        return math.sqrt(4.0 * math.pi / 3.0)
    raise ValueError("only ell in {0, 1} carry explicit modes")


def cutoff(rho, R: float) -> np.ndarray:
    """Smooth radial cutoff: 1 on |rho| <= R, 0 on |rho| >= 2R, quintic C^2 ramp."""
    x = np.clip((np.abs(rho) - R) / R, 0.0, 1.0)
    return np.clip(1.0 - x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x), 0.0, 1.0)


@dataclass(frozen=True)
class SectorOperator:
    ell: int
    geometry: Geometry = field(repr=False)
    diag: np.ndarray = field(repr=False)  # w-form diagonal on all nodes
    off_diag: np.ndarray = field(repr=False)  # a_{i+1/2} / h^2 on all cells

    @property
    def grid(self) -> RadialGrid:
        return self.geometry.grid

    @property
    def weight(self) -> np.ndarray:
        return self.geometry.weight

    def apply(self, u: np.ndarray) -> np.ndarray:
        """H_ell u at interior nodes; Dirichlet rows give 0 at the two ends."""
        c = self.off_diag
        w = self.weight
        out = np.zeros_like(u)
        flux = c * np.diff(u)
        out[1:-1] = (flux[1:] - flux[:-1]) / w[1:-1] + self._potential[1:-1] * u[1:-1]
        return out

    @cached_property
    def _potential(self) -> np.ndarray:
        g = self.geometry
        return g.V - self.ell * (self.ell + 1) * g.metric.inv_rho2

    def inner(self, u, v) -> float:
        return float(np.sum(u * v * self.weight) * self.grid.spacing)

    def norm(self, u) -> float:
        return math.sqrt(self.inner(u, u))

    def interior_norm(self, u) -> float:
        s = self.grid.interior()
        return math.sqrt(float(np.sum(u[s] ** 2 * self.weight[s]) * self.grid.spacing))

    def symmetric_tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of D H D^-1, D = diag(sqrt(w h)), interior nodes."""
        w = self.weight
        d = self.diag[1:-1]
        e = self.off_diag[1:-1] / np.sqrt(w[1:-2] * w[2:-1])
        return d, e

    def eigenvalues(self, k: int | None = None) -> np.ndarray:
        """Top-k eigenvalues, descending (all if k is None)."""
        d, e = self.symmetric_tridiagonal()
        n = d.size
        if k is None or k >= n:
            vals = linalg.eigh_tridiagonal(d, e, eigvals_only=True)
        else:
            vals = linalg.eigh_tridiagonal(
                d, e, eigvals_only=True, select="i", select_range=(n - k, n - 1)
            )
        return np.sort(vals)[::-1]

    def top_eigenpair(self) -> tuple[float, np.ndarray]:
        d, e = self.symmetric_tridiagonal()
        n = d.size
        vals, vecs = linalg.eigh_tridiagonal(d, e, select="i", select_range=(n - 1, n - 1))
        u = np.zeros(self.grid.n_points)
        u[1:-1] = vecs[:, 0] / np.sqrt(self.weight[1:-1] * self.grid.spacing)
        if u[self.grid.center] < 0:
            u = -u
        return float(vals[0]), u


def assemble(ell: int, geometry: Geometry) -> SectorOperator:
    if ell < 0:
        raise ValueError("ell must be non-negative")
    h = geometry.h
    c = geometry.metric.flux_mid / h ** 2
    w = geometry.weight
    q = geometry.V - ell * (ell + 1) * geometry.metric.inv_rho2
    left = np.concatenate([[0.0], c])
    right = np.concatenate([c, [0.0]])
    diag = q - (left + right) / w
    return SectorOperator(ell, geometry, diag, c)


def positive_count(op: SectorOperator, tol: float = POSITIVE_TOL, k: int = 8) -> int:
    return int(np.sum(op.eigenvalues(k) > tol))


@dataclass
class SpectrumReport:
    ell: int
    eigenvalues: np.ndarray
    mu2: float | None = None
    mu2_raw: float | None = None
    mu2_shooting: float | None = None
    phi_mu: np.ndarray | None = None
    kernel_residuals: dict = field(default_factory=dict)

    @property
    def mu(self) -> float:
        return math.sqrt(self.mu2)

    def to_json(self, k: int = 6) -> dict:
        out = {
            "ell": self.ell,
            "eigenvalues": [float(x) for x in self.eigenvalues[:k]],
            "residuals": {key: float(v) for key, v in self.kernel_residuals.items()},
        }
        if self.mu2 is not None:
            out["mu2"] = float(self.mu2)
            out["mu2_shooting"] = float(self.mu2_shooting)
        return out


def kernel_residuals(geometry: Geometry) -> dict:
    H0 = assemble(0, geometry)
    H1 = assemble(1, geometry)
    m = geometry.modes
    return {
        "H1_nu0": H1.interior_norm(H1.apply(m.nu0)),
        "H0_phi_odd": H0.interior_norm(H0.apply(m.phi_odd)),
        "H0_phi_even": H0.interior_norm(H0.apply(m.phi_even)),
    }


def _shoot_rhs(mu2: float, ell: int):
    def rhs(rho, y):
        b2 = 1.0 + rho * rho
        b = math.sqrt(b2)
        s = math.sqrt(b2 + 1.0)
        w = b ** 3 / s
        a = b * s
        q = 6.0 / b2 ** 3 - ell * (ell + 1) / b2
        return [y[1] / a, w * (mu2 - q) * y[0]]

    return rhs


def _shoot_to_origin(mu2: float, start: float, ell: int = 0) -> tuple[float, float]:
    """Decaying solution integrated from rho=start to 0; returns (phi, a phi') at 0."""
    mu = math.sqrt(mu2)
    sgn = math.copysign(1.0, start)
    r = abs(start)
    b = math.sqrt(1.0 + r * r)
    a = b * math.sqrt(b * b + 1.0)
    # flat asymptotics phi ~ exp(-mu r) / r
    y0 = [1.0, -sgn * a * (mu + 1.0 / r)]
    sol = integrate.solve_ivp(
        _shoot_rhs(mu2, ell), (start, 0.0), y0, method="DOP853", rtol=1e-12, atol=1e-14
    )
    phi, p = sol.y[:, -1]
    scale = math.hypot(phi, p)
    return phi / scale, p / scale


def _wronskian(mu2: float, start: float, ell: int) -> float:
    pr, qr = _shoot_to_origin(mu2, start, ell)
    pl, ql = _shoot_to_origin(mu2, -start, ell)
    return pr * ql - qr * pl


@lru_cache(maxsize=16)
def shooting_mu2(start: float = 30.0, ell: int = 0, n_scan: int = 24) -> float:
    """Positive eigenvalue by matching decaying solutions from both ends at rho=0.

    Independent of any grid: scans mu^2 in (0, max V) for a sign change of the
    Wronskian at the origin and refines with Brent's method.
    """
    grid = np.linspace(1e-3, 6.0, n_scan)
    vals = [_wronskian(m, start, ell) for m in grid]
    roots = []
    for lo, hi, flo, fhi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if flo == 0.0 or flo * fhi < 0:
            roots.append(optimize.brentq(_wronskian, lo, hi, args=(start, ell), xtol=1e-15, rtol=1e-15))
    if len(roots) != 1:
        raise SpectrumMismatch(f"expected one positive eigenvalue, shooting found {roots}")
    return roots[0]


def eigen_unstable(
    op: SectorOperator,
    rtol: float = 1e-6,
    richardson: bool = True,
    shooting_start: float | None = None,
) -> SpectrumReport:
    """Positive eigenvalue of H_0 and its w-normalised eigenfunction.

    The flux-form stencil is second order, so the reported mu2 is the
    Richardson combination (4 mu2(h) - mu2(2h)) / 3 when the grid can be
    coarsened; ``mu2_raw`` keeps the single-grid value.
    """
    if op.ell != 0:
        raise ValueError("the unstable eigenvalue lives in the ell=0 sector")
    vals = op.eigenvalues(8)
    mu2_raw, phi = op.top_eigenpair()
    if mu2_raw <= 0:
        raise SpectrumMismatch("H_0 has no positive eigenvalue on this grid")
    phi = phi / op.norm(phi)
    if phi[op.grid.center] < 0:
        phi = -phi
    mu2 = mu2_raw
    if richardson and op.grid.half % 2 == 0:
        coarse = assemble(0, Geometry.build(op.grid.coarsen()))
        mu2 = (4.0 * mu2_raw - coarse.eigenvalues(1)[0]) / 3.0
    rho_max = op.grid.rho_max
    mu = math.sqrt(mu2)
    if math.exp(-mu * rho_max) > 1e-8:
        raise SpectrumMismatch(f"rho_max={rho_max} too small for decay rate mu={mu:.4f}")
    start = shooting_start if shooting_start is not None else min(rho_max, 40.0 / mu)
    mu2_shoot = shooting_mu2(start)
    if abs(mu2 - mu2_shoot) > rtol * mu2:
        raise SpectrumMismatch(
            f"matrix mu2={mu2:.12g} vs shooting mu2={mu2_shoot:.12g} (rtol {rtol:g})"
        )
    return SpectrumReport(
        ell=0,
        eigenvalues=vals,
        mu2=mu2,
        mu2_raw=mu2_raw,
        mu2_shooting=mu2_shoot,
        phi_mu=phi,
        kernel_residuals=kernel_residuals(op.geometry),
    )


# ---------------------------------------------------------------- weighted norms


@dataclass(frozen=True)
class WeightedNorm:
    p: float
    s: int
    gamma: float
    value: float
    shell_terms: tuple = ()


def dyadic_shells(rho: np.ndarray) -> list[np.ndarray]:
    """Boolean masks for A_0 = {|rho| <= 2} and A_k = {2^k <= |rho| <= 2^(k+1)}."""
    r = np.abs(rho)
    shells = [r <= 2.0]
    k = 1
    while 2.0 ** k < r.max():
        shells.append((r >= 2.0 ** k) & (r <= 2.0 ** (k + 1)))
        k += 1
    return shells


def _derivative_density(u, rho, h, order, ell):
    if order == 0:
        return u * u
    if order == 1:
        du = np.gradient(u, h, edge_order=2)
        return du * du + ell * (ell + 1) * u * u / (1.0 + rho * rho)
    if order == 2:
        d2 = np.gradient(np.gradient(u, h, edge_order=2), h, edge_order=2)
        return d2 * d2 + (ell * (ell + 1)) ** 2 * u * u / (1.0 + rho * rho) ** 2
    raise ValueError("derivative order above 2 is not supported")


def weighted_norm(u, geometry: Geometry, p: float, s: int, gamma: float, ell: int = 0) -> WeightedNorm:
    """Dyadic l^p_r H^{s,gamma} norm of a sector profile u."""
    if s > 2:
        raise ValueError("s <= 2 (stencil order)")
    rho, h, w = geometry.rho, geometry.h, geometry.weight
    shells = dyadic_shells(rho)
    total = 0.0
    terms = []
    for order in range(s + 1):
        dens = _derivative_density(u, rho, h, order, ell) * w
        seq = np.array(
            [2.0 ** (k * gamma) * 2.0 ** (k * order) * math.sqrt(np.sum(dens[m]) * h) for k, m in enumerate(shells)]
        )
        terms.append(tuple(seq))
        total += float(np.max(seq)) if math.isinf(p) else float(np.sum(seq ** p) ** (1.0 / p))
    return WeightedNorm(p, s, gamma, total, tuple(terms))


# ---------------------------------------------------------------- coercivity


def coercivity_probe(
    fields: list[tuple[int, np.ndarray]],
    geometry: Geometry,
    phi_mu: np.ndarray,
    R_ctf: float,
) -> dict:
    """Measured constants in the energy coercivity and elliptic estimates.

    For each (ell, u) reports
    ``energy_ratio = ||d_Sigma u|| / (R^1/2 |<-H u,u>|^1/2 + R^1/2 |<u,Z_mu>| + sum |<u,Z_i>|)``
    and the analogous ratio for the weighted-Sobolev bound
    ``||u||_{l^inf H^{2,-3/2}}`` against ``||H u||_{l^1 H^{0,1/2}}`` plus the
    Darboux and pairing terms.  Larger ratio means a larger hidden constant.
    """
    from .darboux import apply_sector  # local: darboux depends on this module

    chi = cutoff(geometry.rho, R_ctf)
    w, h = geometry.weight, geometry.h
    out = []
    for ell, u in fields:
        op = assemble(ell, geometry)
        Hu = op.apply(u)
        quad = abs(op.inner(-Hu, u))
        grad = math.sqrt(float(np.sum(_derivative_density(u, geometry.rho, h, 1, ell) * w) * h))
        if ell == 0:
            pair_mu = abs(float(np.sum(u * chi * phi_mu * w) * h))
            pair_i = 0.0
        elif ell == 1:
            pair_mu = 0.0
            pair_i = abs(angular_factor(1) * float(np.sum(u * chi * geometry.modes.nu0 * w) * h))
        else:
            pair_mu = pair_i = 0.0
        lhs = math.sqrt(R_ctf) * math.sqrt(quad) + math.sqrt(R_ctf) * pair_mu + pair_i
        sob_lhs = weighted_norm(u, geometry, math.inf, 2, -1.5, ell).value
        f1 = weighted_norm(Hu, geometry, 1, 0, 0.5, ell).value
        dar = weighted_norm(apply_sector(Hu, ell, geometry), geometry, 1, 0, 0.5, ell).value if ell == 1 else 0.0
        sob_rhs = f1 + R_ctf ** 2 * dar + pair_i + pair_mu
        out.append(
            {
                "ell": ell,
                "quadratic_form": op.inner(-Hu, u),
                "energy_ratio": grad / lhs if lhs > 0 else math.inf,
                "sobolev_ratio": sob_lhs / sob_rhs if sob_rhs > 0 else math.inf,
            }
        )
    worst = max(r["energy_ratio"] for r in out)
    return {"samples": out, "worst_energy_ratio": worst,
            "worst_sobolev_ratio": max(r["sobolev_ratio"] for r in out)}
