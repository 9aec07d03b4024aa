"""Darboux transform removing the ell=1 kernel nu0 = <rho>^-2.

Two discretisations live here.

* ``apply_sector`` / ``invert`` act on node values in the three-dimensional
  picture: ``D_rbx u = nu0 d/drho (u / nu0)`` with centred differences of the
  quotient, so nu0 is annihilated to round-off.
* ``DarbouxContext`` works on the line (Phi = |g|^{1/4} Psi).  ``D`` maps node
  values to cell midpoints and ``D_star`` is its exact discrete adjoint for
  the plain sum-times-h inner product, so ``-D_star D`` and ``-D D_star`` are
  symmetric by construction.

For the product catenoid the conjugated transformed operator is exactly the
radial Laplacian: the transformed potential vanishes identically.  The
discrete ``transformed_potential`` reproduces this to round-off, growing
like eps / h^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import linalg

from .geometry import Geometry, japanese
from .operators import assemble, cutoff

__all__ = [
    "DarbouxContext",
    "DegeneratePairing",
    "apply",
    "apply_sector",
    "invert",
    "factorization_check",
    "transformed_operator",
    "schur_constant",
]


class DegeneratePairing(ZeroDivisionError):
    """<nu0, Z0> is too small to recover the kernel coefficient."""


def apply_sector(u: np.ndarray, ell: int, geometry: Geometry) -> np.ndarray:
    if ell != 1:
        return np.array(u, copy=True)
    nu0 = geometry.modes.nu0
    return nu0 * np.gradient(u / nu0, geometry.h, edge_order=2)


def apply(sectors: Mapping, geometry: Geometry) -> dict:
    """Transform a field given as {(ell, m): radial profile}."""
    return {key: apply_sector(u, key[0], geometry) for key, u in sectors.items()}


def invert(u: np.ndarray, datum: float, geometry: Geometry, R_ctf: float) -> np.ndarray:
    """Recover Psi from u = D_rbx Psi and the pairing datum <Psi, Z0>_w.

    Psi = c0 nu0 + nu0 int_0^rho u / nu0, with c0 fixed by the datum;
    Z0 = chi_{R_ctf} nu0.
    """
    nu0 = geometry.modes.nu0
    h = geometry.h
    c = geometry.grid.center
    g = u / nu0
    cells = 0.5 * h * (g[1:] + g[:-1])
    prim = np.concatenate([[0.0], np.cumsum(cells)])
    prim -= prim[c]
    particular = nu0 * prim
    Z0 = cutoff(geometry.rho, R_ctf) * nu0
    w = geometry.weight
    base = float(np.sum(nu0 * Z0 * w) * h)
    if abs(base) < 1e-12:
        raise DegeneratePairing(f"<nu0, Z0> = {base:.3e}")
    c0 = (datum - float(np.sum(particular * Z0 * w) * h)) / base
    return c0 * nu0 + particular


@dataclass(frozen=True)
class DarbouxContext:
    geometry: Geometry = field(repr=False)
    nu0: np.ndarray = field(repr=False)
    y0: np.ndarray = field(repr=False)
    sqrt_grr_inv: np.ndarray = field(repr=False)
    y0_mid: np.ndarray = field(repr=False)
    s_mid: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, geometry: Geometry) -> "DarbouxContext":
        grid = geometry.grid
        quarter = np.sqrt(geometry.weight)  # |g|^{1/4}
        nu0 = geometry.modes.nu0
        mid = grid.midpoints
        bm = japanese(mid)
        w_mid = bm ** 3 / np.sqrt(1.0 + bm * bm)
        return cls(
            geometry=geometry,
            nu0=nu0,
            y0=quarter * nu0,
            sqrt_grr_inv=np.sqrt(geometry.metric.speed2),
            y0_mid=np.sqrt(w_mid) / (bm * bm),
            s_mid=np.sqrt((1.0 + bm * bm) / (bm * bm)),
        )

    @property
    def h(self) -> float:
        return self.geometry.h

    def D(self, phi: np.ndarray) -> np.ndarray:
        """Nodes -> midpoints: s y0 d/drho (phi / y0)."""
        return self.s_mid * self.y0_mid * np.diff(phi / self.y0) / self.h

    def D_star(self, psi: np.ndarray) -> np.ndarray:
        """Midpoints -> nodes, exact adjoint of D; zero at the two end nodes."""
        g = self.s_mid * self.y0_mid * psi
        out = np.zeros(psi.size + 1)
        out[1:-1] = -(g[1:] - g[:-1]) / (self.h * self.y0[1:-1])
        return out

    def L1(self, phi: np.ndarray) -> np.ndarray:
        """Line-conjugated H_1: |g|^{1/4} H_1 |g|^{-1/4}."""
        q = np.sqrt(self.geometry.weight)
        return q * assemble(1, self.geometry).apply(phi / q)

    @property
    def transformed_potential(self) -> np.ndarray:
        """Discrete V~ at midpoints: -D D* applied to |g|^{1/4}, divided by it.

        The radial Laplacian of a constant vanishes, so whatever survives is V~.
        The two midpoints touching the Dirichlet nodes are set to nan.
        """
        bm = japanese(self.geometry.grid.midpoints)
        q_mid = np.sqrt(bm ** 3 / np.sqrt(1.0 + bm * bm))
        out = -self.D(self.D_star(q_mid)) / q_mid
        out[[0, -1]] = np.nan
        return out


def factorization_check(ctx: DarbouxContext, samples: list[np.ndarray]) -> float:
    """max over samples of ||L1 phi + D* D phi||_inf / ||phi||_inf on interior nodes."""
    worst = 0.0
    for phi in samples:
        defect = ctx.L1(phi) + ctx.D_star(ctx.D(phi))
        worst = max(worst, float(np.max(np.abs(defect[1:-1])) / np.max(np.abs(phi))))
    return worst


@dataclass
class TransformedSpectrum:
    eigenvalues: np.ndarray
    positive_count: int
    vtilde_decay_constant: float
    symmetry_defect: float


def transformed_operator(ctx: DarbouxContext, k: int = 6, window=(20.0, 60.0), seed: int = 0) -> TransformedSpectrum:
    """Spectrum of L2 = -D D* on midpoint functions (line measure).

    -D D* restricted to midpoints is symmetric tridiagonal; its top eigenvalues
    are returned together with sup |V~| <rho>^4 over ``window``.
    """
    h = ctx.h
    g = ctx.s_mid * ctx.y0_mid
    # (-D D* psi)_{j} for midpoint j: s y0 (1/h) [ (D*psi)_{j+1}/y0_{j+1} - (D*psi)_j/y0_j ]
    # with (D*psi)_i = -(g_i psi_i - g_{i-1} psi_{i-1}) / (h y0_i) at interior nodes i
    inv = 1.0 / ctx.y0[1:-1] ** 2  # interior nodes
    n = g.size
    diag = np.zeros(n)
    diag[:-1] -= g[:-1] ** 2 * inv  # node to the right of midpoint j is interior for j < n-1
    diag[1:] -= g[1:] ** 2 * inv  # node to the left of midpoint j is interior for j > 0
    diag /= h * h
    off = g[:-1] * g[1:] * inv / (h * h)
    m = n
    vals = linalg.eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(m - k, m - 1))
    vals = np.sort(vals)[::-1]
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal(n), rng.standard_normal(n)
    L2 = lambda x: -ctx.D(ctx.D_star(x))  # noqa: E731
    sym = abs(float(np.dot(L2(u), v) - np.dot(u, L2(v)))) * h / (np.linalg.norm(u) * np.linalg.norm(v) * h)
    mid = ctx.geometry.grid.midpoints
    vt = ctx.transformed_potential
    sel = (np.abs(mid) >= window[0]) & (np.abs(mid) <= window[1])
    sel[[0, -1]] = False
    decay = float(np.nanmax(np.abs(vt[sel]) * (1.0 + mid[sel] ** 2) ** 2)) if sel.any() else math.nan
    return TransformedSpectrum(vals, int(np.sum(vals > 1e-6)), decay, sym)


def schur_constant(samples: list[np.ndarray], geometry: Geometry, alpha: float = 0.1, R_ctf: float = 8.0) -> float:
    """max ||<rho>^{-(5+alpha)/2} invert(u, 0)||_w / ||u||_{LE_x} over samples (ell=1)."""
    from .evolution import le_density

    rho, w, h = geometry.rho, geometry.weight, geometry.h
    weight = (1.0 + rho * rho) ** (-(5.0 + alpha) / 2.0)
    worst = 0.0
    for u in samples:
        psi = invert(u, 0.0, geometry, R_ctf)
        lhs = math.sqrt(float(np.sum(weight * psi * psi * w) * h))
        rhs = math.sqrt(le_density(u, np.zeros_like(u), 1, geometry, alpha))
        worst = max(worst, lhs / rhs)
    return worst
