"""Leapfrog evolution of (-d_t^2 + H_ell) psi = F per harmonic sector.

State convention: at time t_n the state holds psi_n and the staggered momentum
pi_{n+1/2}.  The velocity at t_n is recovered as
``pi_{n+1/2} - dt/2 (H psi_n + F_n)`` (velocity-Verlet synchronisation).

Sectors are keyed by ``(ell, m)``; only ``ell`` enters the operator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .geometry import Geometry, MetricData, PotentialData, RadialGrid, SpecialModes
from .operators import SectorOperator, assemble

__all__ = [
    "CFLViolation",
    "WaveState",
    "SourceSpec",
    "NormSeries",
    "Evolver",
    "flat_geometry",
    "compact_bump",
    "le_density",
    "le_pieces",
    "le_star_density",
    "energy_norm2",
    "rp_energy",
    "rp_bulk_density",
    "decay_fit",
    "DecayFit",
]

MAX_SPEED = math.sqrt(2.0)


class CFLViolation(ValueError):
    pass


def flat_geometry(grid: RadialGrid) -> Geometry:
    """Unit coefficients and no potential: evolves v = r u for flat radial waves.

    On the full line the odd extension of v is preserved exactly, so
    u = v / r solves the flat 3-D radial wave equation.
    """
    n = grid.n_points
    one = np.ones(n)
    metric = MetricData(weight=one, flux=one, inv_rho2=np.zeros(n), flux_mid=np.ones(n - 1))
    zero = np.zeros(n)
    modes = SpecialModes(nu0=one, phi_odd=grid.rho.copy(), phi_even=one, z_prime=zero)
    profile = None
    return Geometry(grid, profile, metric, PotentialData(zero), modes)


@dataclass
class WaveState:
    time: float
    sectors: dict  # (ell, m) -> (psi, pi_half)
    step_index: int = 0
    t0: float = 0.0

    def copy(self) -> "WaveState":
        sectors = {k: (p.copy(), q.copy()) for k, (p, q) in self.sectors.items()}
        return WaveState(self.time, sectors, self.step_index, self.t0)


@dataclass
class SourceSpec:
    """Separable source radial_profile(rho) * T(t) in one sector.

    time_profile is a tag with parameters:
    ``("const",)``, ``("japanese", a, shift)`` for <t - shift>^-a switched on
    at t = shift, ``("gaussian", t0, sigma)``, ``("bump", t0, t1)`` for a C^2
    bump supported in [t0, t1].
    """

    sector: tuple
    radial_profile: np.ndarray
    time_profile: tuple = ("const",)
    cutoff: float = 0.0
    kind: str = "separable"
    time_function: Callable | None = field(default=None, repr=False, compare=False)  # overrides the tag

    def __post_init__(self):
        if self.cutoff < 0:
            raise ValueError("cutoff must be >= 0")
        if self.kind not in ("none", "separable"):
            raise ValueError(f"unknown source kind {self.kind!r}")

    def time_factor(self, t: float) -> float:
        if self.time_function is not None:
            return float(self.time_function(t))
        tag, *par = self.time_profile
        if tag == "const":
            return 1.0
        if tag == "japanese":
            a, shift = par
            return 0.0 if t < shift else (1.0 + (t - shift) ** 2) ** (-a / 2.0)
        if tag == "gaussian":
            t0, sigma = par
            return math.exp(-(((t - t0) / sigma) ** 2))
        if tag == "bump":
            t0, t1 = par
            if t <= t0 or t >= t1:
                return 0.0
            x = (t - t0) / (t1 - t0)
            return (4.0 * x * (1.0 - x)) ** 3
        raise ValueError(f"unknown time profile {tag!r}")

    def spatial(self, rho: np.ndarray) -> np.ndarray:
        if self.kind == "none":
            return np.zeros_like(rho)
        if self.cutoff > 0:
            return self.radial_profile * (np.abs(rho) >= self.cutoff)
        return self.radial_profile


def compact_bump(rho, center: float, width: float) -> np.ndarray:
    """(1 - x^2)^6 on |x| < 1 with x = (rho - center) / width; C^5 with compact support."""
    x = (np.asarray(rho) - center) / width
    return np.clip(1.0 - x * x, 0.0, None) ** 6


# ---------------------------------------------------------------- functionals


def le_pieces(psi, dpsi_dt, ell: int, geometry: Geometry, alpha: float = 0.1) -> dict:
    """The four LE_x^2 integrands (derivative, time, angular, zeroth order), weighted by w h."""
    rho, h, w = geometry.rho, geometry.h, geometry.weight
    b2 = 1.0 + rho * rho
    dr = np.gradient(psi, h, edge_order=2)
    r2 = rho * rho
    dens = {
        "radial": b2 ** (-(1.0 + alpha) / 2.0) * dr * dr,
        "time": r2 * b2 ** (-(3.0 + alpha) / 2.0) * dpsi_dt * dpsi_dt,
        "angular": r2 * b2 ** -1.5 * ell * (ell + 1) / b2 * psi * psi,
        "zeroth": r2 * b2 ** (-(5.0 + alpha) / 2.0) * psi * psi,
    }
    return {k: v * w * h for k, v in dens.items()}


def le_density(psi, dpsi_dt, ell: int, geometry: Geometry, alpha: float = 0.1) -> float:
    """Spatial LE_x^2: the four weighted pieces, integrated with the volume weight."""
    return float(sum(np.sum(v) for v in le_pieces(psi, dpsi_dt, ell, geometry, alpha).values()))


def le_star_density(f, geometry: Geometry, alpha: float = 0.1) -> float:
    rho, h, w = geometry.rho, geometry.h, geometry.weight
    return float(np.sum((1.0 + rho * rho) ** ((1.0 + alpha) / 2.0) * f * f * w) * h)


def energy_norm2(psi, dpsi_dt, ell: int, geometry: Geometry) -> float:
    """||d_t psi||^2 + ||d_x psi||^2 with the catenoid metric (non-negative)."""
    h, w = geometry.h, geometry.weight
    dr = np.gradient(psi, h, edge_order=2)
    grad2 = geometry.metric.speed2 * dr * dr + ell * (ell + 1) * geometry.metric.inv_rho2 * psi * psi
    return float(np.sum((dpsi_dt * dpsi_dt + grad2) * w) * h)


def _outgoing(psi, dpsi_dt, geometry):
    rho, h = geometry.rho, geometry.h
    r = np.abs(rho)
    v = np.sqrt(geometry.metric.speed2)
    tilde = r * psi
    d = np.gradient(tilde, h, edge_order=2)
    return r, np.sign(rho) * v * d + r * dpsi_dt, tilde


def rp_energy(psi, dpsi_dt, geometry: Geometry, p: float, R_tilde: float) -> float:
    """E^p = int_{|rho| >= R~} |rho|^p ((d_t + v d_r)(r psi))^2 drho, both ends."""
    r, Lt, _ = _outgoing(psi, dpsi_dt, geometry)
    chi = r >= R_tilde
    return float(np.sum(np.where(chi, r ** p * Lt * Lt, 0.0)) * geometry.h)


def rp_bulk_density(psi, dpsi_dt, ell: int, geometry: Geometry, p: float, R_tilde: float) -> float:
    r, Lt, tilde = _outgoing(psi, dpsi_dt, geometry)
    chi = r >= R_tilde
    rs = np.where(chi, r, 1.0)
    dens = rs ** (p - 1.0) * (Lt * Lt + (2.0 - p) / rs ** 2 * (ell * (ell + 1) + 1.0) * tilde * tilde)
    return float(np.sum(np.where(chi, dens, 0.0)) * geometry.h)


# ---------------------------------------------------------------- evolution


@dataclass
class NormSeries:
    times: list = field(default_factory=list)
    energy: list = field(default_factory=list)  # conserved discrete energy
    energy_norm: list = field(default_factory=list)
    le_density: list = field(default_factory=list)
    le_integral: list = field(default_factory=list)
    le_star: list = field(default_factory=list)
    rp: dict = field(default_factory=dict)  # p -> list
    rp_bulk: dict = field(default_factory=dict)  # p -> running integral
    probes: dict = field(default_factory=dict)  # rho -> list

    def as_columns(self) -> dict:
        cols = {
            "t": self.times,
            "energy": self.energy,
            "energy_norm": self.energy_norm,
            "le_density": self.le_density,
            "le_integral": self.le_integral,
            "le_star": self.le_star,
        }
        for p, vals in self.rp.items():
            cols[f"E{p:g}"] = vals
        for p, vals in self.rp_bulk.items():
            cols[f"B{p:g}"] = vals
        return cols


class Evolver:
    """Leapfrog integrator over a set of sectors sharing one grid."""

    def __init__(
        self,
        geometry: Geometry,
        dt: float,
        sources: list[SourceSpec] | None = None,
        cfl_safety: float = 1.0,
        deflate: Mapping | None = None,
    ):
        h = geometry.h
        speed = math.sqrt(float(np.max(geometry.metric.speed2)))
        if dt > cfl_safety * h / speed * (1 + 1e-12):
            raise CFLViolation(f"dt={dt} exceeds {cfl_safety} * h / {speed:.4f} = {cfl_safety * h / speed:.5f}")
        self.geometry = geometry
        self.dt = dt
        self.sources = list(sources or [])
        self._ops: dict[int, SectorOperator] = {}
        # ell -> w-normalised vectors whose span is projected out after each step
        self.deflate = {ell: [np.asarray(v) for v in vecs] for ell, vecs in (deflate or {}).items()}

    def operator(self, ell: int) -> SectorOperator:
        if ell not in self._ops:
            self._ops[ell] = assemble(ell, self.geometry)
        return self._ops[ell]

    def force(self, key, psi, t) -> np.ndarray:
        out = self.operator(key[0]).apply(psi)
        for src in self.sources:
            if src.sector == key:
                tf = src.time_factor(t)
                if tf != 0.0:
                    f = tf * src.spatial(self.geometry.rho)
                    out[1:-1] += f[1:-1]
        return out

    def _project(self, key, *arrays):
        vecs = self.deflate.get(key[0])
        if not vecs:
            return
        w, h = self.geometry.weight, self.geometry.h
        for a in arrays:
            for v in vecs:
                a -= (np.sum(a * v * w) * h) * v

    def initial_state(self, data: Mapping, t0: float = 0.0) -> WaveState:
        """data: {(ell, m): (psi0, dpsi0)}; boundary nodes are zeroed."""
        sectors = {}
        for key, (psi0, v0) in data.items():
            psi = np.array(psi0, dtype=float, copy=True)
            v = np.array(v0, dtype=float, copy=True)
            psi[[0, -1]] = 0.0
            v[[0, -1]] = 0.0
            self._project(key, psi, v)
            pi = v + 0.5 * self.dt * self.force(key, psi, t0)
            sectors[key] = (psi, pi)
        return WaveState(t0, sectors, 0, t0)

    def step(self, state: WaveState) -> WaveState:
        """One leapfrog step, in place on the arrays; returns the same object."""
        dt = self.dt
        t_new = state.time + dt
        for key, (psi, pi) in state.sectors.items():
            psi += dt * pi
            pi += dt * self.force(key, psi, t_new)
            self._project(key, psi, pi)
        state.step_index += 1
        # t0 + n dt avoids accumulated round-off in the clock
        state.time = state.t0 + state.step_index * dt
        return state

    def velocity(self, state: WaveState, key) -> np.ndarray:
        psi, pi = state.sectors[key]
        return pi - 0.5 * self.dt * self.force(key, psi, state.time)

    def energy(self, state: WaveState) -> float:
        """Exactly conserved leapfrog energy (homogeneous case).

        1/2 <pi_{n+1/2}, pi_{n-1/2}>_w + 1/2 <psi_n, -H psi_n>_w.
        """
        total = 0.0
        for key, (psi, pi) in state.sectors.items():
            op = self.operator(key[0])
            Hpsi = op.apply(psi)
            pi_prev = pi - self.dt * self.force(key, psi, state.time)
            total += 0.5 * op.inner(pi, pi_prev) - 0.5 * op.inner(psi, Hpsi)
        return total

    def run(
        self,
        state: WaveState,
        T: float,
        sample_every: int = 1,
        alpha: float = 0.1,
        probes=(),
        rp_powers=(),
        R_tilde: float = 10.0,
        callback: Callable | None = None,
        transform: Callable | None = None,
    ) -> NormSeries:
        """Advance to time T, sampling functionals every ``sample_every`` steps.

        ``transform(key, psi, v)`` may return a modified (psi, v) pair on which
        the functionals are evaluated (e.g. a projection); the evolution itself
        is unaffected.  ``callback(state, evolver)`` is called at every sample.
        """
        series = NormSeries()
        for p in rp_powers:
            series.rp[p] = []
            series.rp_bulk[p] = []
        for r in probes:
            series.probes[r] = []
        g = self.geometry
        probe_idx = [int(round((r + g.grid.rho_max) / g.h)) for r in probes]
        n_steps = int(round((T - state.time) / self.dt))
        prev_t = prev_le = None
        prev_bulk = {p: None for p in rp_powers}
        for n in range(n_steps + 1):
            if n % sample_every == 0 or n == n_steps:
                t = state.time
                le = le_s = en = 0.0
                rp_vals = {p: 0.0 for p in rp_powers}
                bulk_vals = {p: 0.0 for p in rp_powers}
                probe_vals = [0.0] * len(probes)
                for key, (psi, _) in state.sectors.items():
                    v = self.velocity(state, key)
                    if transform is not None:
                        psi, v = transform(key, psi, v)
                    ell = key[0]
                    le += le_density(psi, v, ell, g, alpha)
                    en += energy_norm2(psi, v, ell, g)
                    f = self.force(key, psi, t) - self.operator(ell).apply(psi)
                    le_s += le_star_density(f, g, alpha)
                    for p in rp_powers:
                        rp_vals[p] += rp_energy(psi, v, g, p, R_tilde)
                        bulk_vals[p] += rp_bulk_density(psi, v, ell, g, p, R_tilde)
                    for j, i in enumerate(probe_idx):
                        probe_vals[j] += psi[i]
                series.times.append(t)
                series.energy.append(self.energy(state))
                series.energy_norm.append(en)
                series.le_density.append(le)
                series.le_star.append(le_s)
                if prev_t is None:
                    series.le_integral.append(0.0)
                else:
                    series.le_integral.append(series.le_integral[-1] + 0.5 * (t - prev_t) * (le + prev_le))
                for p in rp_powers:
                    series.rp[p].append(rp_vals[p])
                    if prev_bulk[p] is None:
                        series.rp_bulk[p].append(0.0)
                    else:
                        series.rp_bulk[p].append(series.rp_bulk[p][-1] + 0.5 * (t - prev_t) * (bulk_vals[p] + prev_bulk[p]))
                    prev_bulk[p] = bulk_vals[p]
                for r, val in zip(probes, probe_vals):
                    series.probes[r].append(val)
                prev_t, prev_le = t, le
                if callback is not None:
                    callback(state, self)
            if n < n_steps:
                self.step(state)
        return series


# ---------------------------------------------------------------- decay fits


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    stderr: float
    n: int


def decay_fit(times, values, window=None) -> DecayFit:
    """Least-squares slope of log|value| against log t."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, y = t[sel], y[sel]
    if t.size < 8 or t.max() < 4 * t.min():
        raise ValueError("decay fit needs >= 8 samples spanning a factor >= 4 in t")
    if np.any(y == 0) or np.any(t <= 0):
        raise ValueError("decay fit needs non-zero samples at positive times")
    if np.any(np.sign(y) != np.sign(y[0])):
        raise ValueError("decay fit window contains a sign change")
    x, z = np.log(t), np.log(np.abs(y))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, z, rcond=None)
    resid = z - A @ coef
    dof = max(x.size - 2, 1)
    s2 = float(resid @ resid) / dof
    se = math.sqrt(s2 / float(np.sum((x - x.mean()) ** 2)))
    return DecayFit(float(coef[0]), se, int(x.size))
