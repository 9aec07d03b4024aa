"""Exact forward solutions of the flat radial wave equation u_tt - Delta u = f.

With v = r u and the odd extension of r f, v_tt - v_rr = r f on the line, so

    v(t, r) = 1/2 int_0^t T(s) int_{|r - (t-s)|}^{r + (t-s)} y P(y) dy ds

for separable f = P(r) T(t).  The inner integral is evaluated from a closed
antiderivative of y P(y) when one is known and by adaptive quadrature
otherwise; the outer one always by adaptive quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .evolution import DecayFit, Evolver, SourceSpec, decay_fit, flat_geometry
from .geometry import RadialGrid

__all__ = [
    "SeparableSource",
    "TailSource",
    "OracleSolution",
    "OracleQuadratureError",
    "dalembert",
    "dichotomy_experiment",
    "ray_exponent",
    "cross_validate",
    "gaussian_source",
    "impulsive_source",
    "sample_times",
]

ORACLE_TOL = 1e-8


class OracleQuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class SeparableSource:
    """f(t, r) = spatial(r) temporal(t); zero for t < t_on and for r outside [r0, r_max]."""

    spatial: Callable = field(repr=False)
    temporal: Callable = field(repr=False)
    t_on: float = 0.0
    t_off: float = math.inf
    r0: float = 0.0
    r_max: float = math.inf
    antiderivative: Callable | None = field(default=None, repr=False)  # of y * spatial(y)

    def __call__(self, t, r):
        t = np.asarray(t, dtype=float)
        r = np.abs(np.asarray(r, dtype=float))
        on = (t >= self.t_on) & (t <= self.t_off) & (r >= self.r0) & (r <= self.r_max)
        return np.where(on, self.spatial(r) * self.temporal(np.maximum(t, self.t_on)), 0.0)

    def inner(self, lo: float, hi: float, tol: float) -> float:
        lo, hi = max(lo, self.r0), min(hi, self.r_max)
        if hi <= lo:
            return 0.0
        if self.antiderivative is not None:
            return float(self.antiderivative(hi) - self.antiderivative(lo))
        val, err = integrate.quad(lambda y: y * self.spatial(y), lo, hi, epsabs=0.0, epsrel=tol, limit=200)
        if err > 10 * tol * max(abs(val), 1e-300) and err > 1e-300:
            raise OracleQuadratureError(f"inner quadrature error {err:.2e}")
        return val


def TailSource(a: float, b: float, shift: float = 0.0, r0: float = 0.0) -> SeparableSource:
    """<r>^-a <t - shift>^-b switched on at t = shift, optionally cut to r >= r0."""
    if a < 3:
        raise ValueError("tail sources need a >= 3")
    if b <= 1:
        raise ValueError("tail sources need b > 1")
    anti = lambda y: (1.0 + y * y) ** (1.0 - a / 2.0) / (2.0 - a)  # noqa: E731
    return SeparableSource(
        spatial=lambda r: (1.0 + r * r) ** (-a / 2.0),
        temporal=lambda t: (1.0 + (t - shift) ** 2) ** (-b / 2.0),
        t_on=shift,
        r0=r0,
        antiderivative=anti,
    )


def gaussian_source(t0: float = 4.0, sigma: float = 1.0, width: float = 1.0) -> SeparableSource:
    """exp(-(r/width)^2) exp(-((t - t0)/sigma)^2) for t >= 0."""
    anti = lambda y: -0.5 * width * width * math.exp(-((y / width) ** 2))  # noqa: E731
    return SeparableSource(
        spatial=lambda r: np.exp(-((r / width) ** 2)),
        temporal=lambda t: np.exp(-(((t - t0) / sigma) ** 2)),
        antiderivative=anti,
    )


def _c2_bump(x):
    x = np.clip(x, 0.0, 1.0)
    return (4.0 * x * (1.0 - x)) ** 3


def impulsive_source(t_end: float = 1.0, r_end: float = 2.0) -> SeparableSource:
    """C^2 bump supported in 0 <= t <= t_end, r <= r_end (no closed antiderivative)."""
    return SeparableSource(
        spatial=lambda r: _c2_bump(0.5 + 0.5 * np.asarray(r) / r_end),
        temporal=lambda t: _c2_bump(np.asarray(t) / t_end),
        t_on=0.0,
        t_off=t_end,
        r_max=r_end,
    )


def dalembert(source: SeparableSource, t: float, r: float, tol: float = ORACLE_TOL) -> float:
    """u(t, r) for the forward problem; r = 0 uses the limit of v / r."""
    if r < 0:
        raise ValueError("r must be non-negative")
    s_lo, s_hi = max(0.0, source.t_on), min(t, source.t_off)
    if t <= 0 or s_hi <= s_lo:
        return 0.0
    T = source.temporal
    if r == 0.0:
        def g(s):
            return (t - s) * float(source(s, t - s))
        scale = 1.0
    else:
        def g(s):
            tau = t - s
            return 0.5 * T(s) * source.inner(abs(r - tau), r + tau, tol * 1e-2)
        scale = r
    # kinks where the lower limit |r - tau| hits 0 and where it crosses r0 / r_max
    pts = [p for p in (t - r, t - r - source.r0, t - r + source.r0, t - r - source.r_max, t + r - source.r_max)
           if s_lo < p < s_hi and math.isfinite(p)]
    val, err = integrate.quad(g, s_lo, s_hi, points=sorted(set(pts)) or None, epsabs=0.0, epsrel=tol, limit=500)
    if err > 10 * tol * abs(val) and err > 1e-300:
        raise OracleQuadratureError(f"outer quadrature error {err:.2e} at t={t}, r={r}")
    return val / scale


@dataclass(frozen=True)
class OracleSolution:
    source: SeparableSource
    tol: float = ORACLE_TOL

    def __call__(self, t: float, r: float) -> float:
        return dalembert(self.source, t, r, self.tol)


def sample_times(window=(50.0, 800.0), n: int = 24) -> np.ndarray:
    return np.geomspace(window[0], window[1], n)


def dichotomy_experiment(a: float, b: float, probes=(1.0, 5.0), window=(50.0, 800.0), n: int = 24) -> dict:
    """Fitted exponents of u(t, r_probe) over ``window`` for f = <r>^-a <t>^-b."""
    sol = OracleSolution(TailSource(a, b))
    ts = sample_times(window, n)
    out = {}
    for r in probes:
        vals = [sol(t, r) for t in ts]
        out[r] = decay_fit(ts, vals)
    return out


def ray_exponent(a: float, b: float, fraction: float = 0.5, window=(50.0, 800.0), n: int = 24) -> DecayFit:
    """Exponent of r u(t, r) along the ray r = fraction * t."""
    sol = OracleSolution(TailSource(a, b))
    ts = sample_times(window, n)
    return decay_fit(ts, [fraction * t * sol(t, fraction * t) for t in ts])


@dataclass
class CrossValidation:
    spacings: list
    discrepancies: list  # max over probes and sample times
    orders: list
    huygens_value: float | None = None


def _grid_run(source: SeparableSource, h: float, T: float, probes, times, dt_ratio: float, rho_max: float):
    grid = RadialGrid.from_spacing(rho_max, h)
    geo = flat_geometry(grid)
    rho = grid.rho
    prof = rho * source.spatial(np.abs(rho)) * ((np.abs(rho) >= source.r0) & (np.abs(rho) <= source.r_max))

    def tf(t):
        return float(source.temporal(t)) if source.t_on <= t <= source.t_off else 0.0

    spec = SourceSpec((0, 0), prof, time_function=tf)
    dt = dt_ratio * h
    ev = Evolver(geo, dt, [spec])
    st = ev.initial_state({(0, 0): (np.zeros_like(rho), np.zeros_like(rho))})
    idx = [grid.center + int(round(r / h)) for r in probes]
    want = {int(round(t / dt)): t for t in times}
    n_steps = int(round(T / dt))
    out = {}
    for n in range(n_steps + 1):
        if n in want:
            psi = st.sectors[(0, 0)][0]
            out[want[n]] = [psi[i] / rho[i] for i in idx]
        if n < n_steps:
            ev.step(st)
    return out


def cross_validate(source: SeparableSource | None = None, spacings=(0.1, 0.05, 0.025), T: float = 20.0,
                   probes=(1.0, 5.0), times=None, dt_ratio: float = 0.5, rho_max: float | None = None) -> CrossValidation:
    """Max |u_grid - u_oracle| over probes and times for each spacing, with observed orders."""
    source = source or gaussian_source()
    times = list(times) if times is not None else [T / 4, T / 2, 3 * T / 4, T]
    rho_max = rho_max or float(math.ceil(T + 10.0))
    oracle = {(t, r): dalembert(source, t, r, 1e-11) for t in times for r in probes}
    disc = []
    for h in spacings:
        run = _grid_run(source, h, T, probes, times, dt_ratio, rho_max)
        disc.append(max(abs(run[t][j] - oracle[(t, r)]) for t in times for j, r in enumerate(probes)))
    orders = [math.log2(disc[i] / disc[i + 1]) if disc[i + 1] > 0 else math.inf for i in range(len(disc) - 1)]
    return CrossValidation(list(spacings), disc, orders)


def huygens_grid_check(h: float = 0.05, t_probe: float = 30.0, r_probe: float = 1.0, dt_ratio: float = 0.5) -> dict:
    """Grid value at (t_probe, r_probe) for an impulsive source against the run's O(h^2) error floor.

    The floor is the max grid-oracle discrepancy at the probe over t in [1, 6],
    while the source is active and the oracle is non-zero.
    """
    src = impulsive_source()
    early = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    run = _grid_run(src, h, t_probe, [r_probe], early + [t_probe], dt_ratio, float(math.ceil(t_probe + 10)))
    floor = max(abs(run[t][0] - dalembert(src, t, r_probe, 1e-11)) for t in early)
    return {"value": abs(run[t_probe][0]), "oracle": dalembert(src, t_probe, r_probe), "floor": floor}
