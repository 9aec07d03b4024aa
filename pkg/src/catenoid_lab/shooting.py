"""Codimension-one trapping of the unstable mode by bisection on b0.

The data family is (psi0 + b0 G_psi, v0 + b0 G_v) with G the growing
direction picked by :func:`classify_directions`.  Each trial evolves the
ell = 0 sector and records a_+(t) = Omega(psi, Z_-); it exits on the side
sign(a_+) once |a_+| exceeds the envelope lambda(t) = lambda0 <t>^-3.

A trial near the stable manifold grows like |b0 - b0*| e^{mu t}, so reaching
t = 40 needs |b0 - b0*| and the arithmetic round-off below e^{-mu 40} ~ 1e-20.
``precision="dd"`` runs the leapfrog in double-double arithmetic for that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ddarith import DD, dd_midpoint
from .evolution import Evolver
from .geometry import Geometry
from .modulation import FirstOrderVector, ZVectors, project_unstable
from .operators import SectorOperator, assemble

__all__ = [
    "TrapEnvelope",
    "DataFamily",
    "TrialResult",
    "ShootingOutcome",
    "DirectionReport",
    "BracketError",
    "DegenerateFamily",
    "classify_directions",
    "analytic_b0",
    "run_trial",
    "shoot",
    "random_family",
    "escape_rate_samples",
    "leapfrog_speed",
    "growing_direction",
]

SECTOR = (0, 0)


class BracketError(ValueError):
    """Both bracket ends exit on the same side of the envelope."""


class DegenerateFamily(ZeroDivisionError):
    """The b0 direction has no growing component."""


@dataclass(frozen=True)
class TrapEnvelope:
    lambda0: float
    law: str = "japanese3"

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")
        if self.law not in ("japanese3",):
            raise ValueError(f"unknown envelope law {self.law!r}")

    def __call__(self, t):
        return self.lambda0 * (1.0 + np.square(t)) ** -1.5


@dataclass(frozen=True)
class DataFamily:
    psi0: np.ndarray = field(repr=False)
    v0: np.ndarray = field(repr=False)
    dir_psi: np.ndarray = field(repr=False)
    dir_v: np.ndarray = field(repr=False)

    def at(self, b: float):
        return self.psi0 + b * self.dir_psi, self.v0 + b * self.dir_v


@dataclass
class DirectionReport:
    rate_plus: float  # fitted rate of a_+ for the Z_+ analogue seed
    rate_minus: float  # fitted rate of a_- for the Z_- analogue seed
    rate_mixed: float
    growing: str  # "plus" or "minus"
    mu: float


@dataclass
class TrialResult:
    b0: float
    exit_side: int  # +1, -1, or 0 when trapped to T_final
    exit_time: float
    times: np.ndarray = field(repr=False)
    a_plus: np.ndarray = field(repr=False)
    envelope: np.ndarray = field(repr=False)


@dataclass
class ShootingOutcome:
    b0_star: float
    b0_star_lo: float  # double-double low word
    brackets: list
    trials: list
    trapped: TrialResult
    envelope: TrapEnvelope
    iterations: int
    precision: str

    @property
    def exit_sides(self) -> list:
        return [t.exit_side for t in self.trials]


def _fit_rate(t, y, window):
    sel = (t >= window[0]) & (t <= window[1])
    if sel.sum() < 4 or np.any(y[sel] == 0):
        raise ValueError("not enough non-zero samples to fit a rate")
    return float(np.polyfit(t[sel], np.log(np.abs(y[sel])), 1)[0])


def _series(geometry, zv, psi, v, dt, T, sample_dt):
    ev = Evolver(geometry, dt)
    st = ev.initial_state({SECTOR: (psi, v)})
    every = max(1, int(round(sample_dt / dt)))
    n_steps = int(round(T / dt))
    ts, ap, am = [], [], []
    for n in range(n_steps + 1):
        if n % every == 0:
            u = FirstOrderVector.from_velocity(st.sectors[SECTOR][0], ev.velocity(st, SECTOR), geometry, SECTOR)
            a, b = project_unstable(u, zv)
            ts.append(st.time)
            ap.append(a)
            am.append(b)
        if n < n_steps:
            ev.step(st)
    return np.array(ts), np.array(ap), np.array(am)


def leapfrog_speed(mu: float, dt: float) -> float:
    """Velocity factor s with (phi, +-s phi) an exact leapfrog eigen-direction.

    The discrete rate is m = arccosh(1 + mu^2 dt^2 / 2) / dt and s = sinh(m dt) / dt;
    using mu itself leaves an O(dt^2) growing admixture in the decaying seed.
    """
    return math.sinh(math.acosh(1.0 + 0.5 * (mu * dt) ** 2)) / dt


def classify_directions(zv: ZVectors, dt: float, T: float = 10.0, window=(2.0, 10.0)) -> DirectionReport:
    """Seed the flow with the untruncated analogues of Z_+ and Z_- and fit rates.

    The Z_+ analogue is (phi, v = +s phi) and the Z_- analogue (phi, v = -s phi)
    with s from :func:`leapfrog_speed` (s = mu to O(dt^2)).  ``zv`` must be
    built from the discrete top eigenpair of the same grid.
    """
    g, phi, mu = zv.geometry, zv.phi_mu, zv.mu
    s = leapfrog_speed(mu, dt)
    t, ap, _ = _series(g, zv, phi, s * phi, dt, T, 0.1)
    r_plus = _fit_rate(t, ap, window)
    t, _, am = _series(g, zv, phi, -s * phi, dt, T, 0.1)
    r_minus = _fit_rate(t, am, window)
    t, ap, _ = _series(g, zv, 2 * phi, np.zeros_like(phi), dt, T, 0.1)
    r_mixed = _fit_rate(t, ap, (0.5 * (window[0] + window[1]), window[1]))
    if r_plus * r_minus >= 0:
        raise RuntimeError(f"seed rates {r_plus:.4f}, {r_minus:.4f} share a sign; M is mis-assembled")
    return DirectionReport(r_plus, r_minus, r_mixed, "plus" if r_plus > 0 else "minus", mu)


def growing_direction(zv: ZVectors, report: DirectionReport | None = None):
    """(G_psi, G_v) = chi phi_mu (1, +-mu) along the classifier's growing direction."""
    sign = 1.0 if report is None or report.growing == "plus" else -1.0
    f = zv.chi * zv.phi_mu
    return f, sign * zv.mu * f


def analytic_b0(family: DataFamily, phi: np.ndarray, mu: float, geometry: Geometry, sign: float = 1.0) -> float:
    """b0 making the growing coefficient 1/2(<psi, phi> + sign <v, phi> / mu) / ||phi||^2 vanish."""
    w, h = geometry.weight, geometry.h
    ip = lambda a: float(np.sum(a * phi * w) * h)  # noqa: E731
    nrm = ip(phi)
    coef = lambda p, v: 0.5 * (ip(p) + sign * ip(v) / mu) / nrm  # noqa: E731
    c_dir = coef(family.dir_psi, family.dir_v)
    if abs(c_dir) < 1e-14:
        raise DegenerateFamily("family direction is orthogonal to the growing mode")
    return -coef(family.psi0, family.v0) / c_dir


def random_family(geometry: Geometry, zv: ZVectors, rng: np.random.Generator, support: float = 6.0,
                  report: DirectionReport | None = None) -> DataFamily:
    """Random smooth compact ell=0 data (three C^2 bumps per component) plus the growing direction."""
    rho = geometry.rho

    def bumps():
        out = np.zeros_like(rho)
        for _ in range(3):
            c = rng.uniform(-support + 2, support - 2)
            wdt = rng.uniform(0.5, 2.0)
            x = np.clip(1.0 - ((rho - c) / wdt) ** 2, 0.0, None)
            out += rng.normal() * x ** 3
        return 0.1 * out

    g_psi, g_v = growing_direction(zv, report)
    return DataFamily(bumps(), bumps(), g_psi, g_v)


# ---------------------------------------------------------------- trials


class _Flow:
    """Homogeneous ell=0 leapfrog in float64 or double-double."""

    def __init__(self, op: SectorOperator, dt: float, psi, v, precision: str):
        self.op, self.dt, self.precision = op, dt, precision
        g = op.geometry
        self.c = op.off_diag
        self.inv_w = 1.0 / g.weight[1:-1]
        self.pot = op._potential[1:-1]
        if precision == "double":
            self.psi = np.array(psi.to_float() if isinstance(psi, DD) else psi, dtype=float)
            v = v.to_float() if isinstance(v, DD) else v
            self.psi[[0, -1]] = 0.0
            self.Hpsi = op.apply(self.psi)
            self.pi = v + 0.5 * dt * self.Hpsi
            self.pi[[0, -1]] = 0.0
        elif precision == "dd":
            self.psi = psi.copy() if isinstance(psi, DD) else DD.from_float(psi)
            v = v.copy() if isinstance(v, DD) else DD.from_float(v)
            for a in (self.psi, v):
                a.hi[[0, -1]] = 0.0
                a.lo[[0, -1]] = 0.0
            self.Hpsi = self._H_dd(self.psi)
            self.pi = v + self.Hpsi.scale(0.5 * dt)
        else:
            raise ValueError(f"unknown precision {precision!r}")

    def _H_dd(self, u: DD) -> DD:
        flux = u.diff().scale(self.c)
        inner = (flux[1:] - flux[:-1]).scale(self.inv_w) + u[1:-1].scale(self.pot)
        z = np.zeros(u.hi.size)
        out = DD(z, z.copy())
        out[1:-1] = inner
        return out

    def step(self):
        dt = self.dt
        if self.precision == "double":
            self.psi += dt * self.pi
            self.Hpsi = self.op.apply(self.psi)
            self.pi += dt * self.Hpsi
        else:
            self.psi = self.psi + self.pi.scale(dt)
            self.Hpsi = self._H_dd(self.psi)
            self.pi = self.pi + self.Hpsi.scale(dt)

    def fields(self):
        if self.precision == "double":
            return self.psi, self.pi - 0.5 * self.dt * self.Hpsi
        v = self.pi - self.Hpsi.scale(0.5 * self.dt)
        return self.psi.to_float(), v.to_float()


def _family_data(family: DataFamily, b, precision):
    if precision == "double":
        return family.at(float(b.hi + b.lo) if isinstance(b, DD) else b)
    if not isinstance(b, DD):
        b = DD(np.float64(b), np.float64(0.0))
    n = family.psi0.size
    bb = DD(np.full(n, b.hi), np.full(n, b.lo))
    return DD.from_float(family.psi0) + bb.scale(family.dir_psi), DD.from_float(family.v0) + bb.scale(family.dir_v)


def _a_plus(zv, psi, v):
    return project_unstable(FirstOrderVector.from_velocity(psi, v, zv.geometry, SECTOR), zv)[0]


def run_trial(family: DataFamily, b, zv: ZVectors, envelope: TrapEnvelope, dt: float, T_final: float,
              sample_dt: float = 0.1, precision: str = "double") -> TrialResult:
    op = assemble(0, zv.geometry)
    psi, v = _family_data(family, b, precision)
    flow = _Flow(op, dt, psi, v, precision)
    every = max(1, int(round(sample_dt / dt)))
    n_steps = int(round(T_final / dt))
    ts, ap = [], []
    side, t_exit = 0, T_final
    for n in range(n_steps + 1):
        if n % every == 0 or n == n_steps:
            t = n * dt
            a = _a_plus(zv, *flow.fields())
            ts.append(t)
            ap.append(a)
            if abs(a) > envelope(t):
                side, t_exit = (1 if a > 0 else -1), t
                break
        if n < n_steps:
            flow.step()
    ts = np.array(ts)
    b_float = float(b.hi + b.lo) if isinstance(b, DD) else float(b)
    return TrialResult(b_float, side, t_exit, ts, np.array(ap), envelope(ts))


def shoot(family: DataFamily, zv: ZVectors, bracket=(-1.0, 1.0), dt: float = 0.02, T_final: float = 40.0,
          envelope_factor: float = 1e3, tol: float = 1e-12, max_iter: int = 200, sample_dt: float = 0.1,
          precision: str = "double", refine_trapped: bool = False) -> ShootingOutcome:
    """Bisect b0 until a trial stays under the envelope to T_final or the bracket is below ``tol``.

    lambda0 = envelope_factor * |a_+(0)| of the bracket midpoint, the first
    trapped candidate.  With ``refine_trapped`` the bisection continues past
    trapped trials down to ``tol``, using sign a_+(T_final) as their side; the
    reported trapped run is the last trapped trial.
    """
    lo = DD(np.float64(bracket[0]), np.float64(0.0))
    hi = DD(np.float64(bracket[1]), np.float64(0.0))
    mid = dd_midpoint(lo, hi)
    psi, v = _family_data(family, mid, "double")
    a0 = abs(_a_plus(zv, psi, v))
    if a0 == 0:
        raise DegenerateFamily("a_+(0) vanishes at the bracket midpoint; shift the bracket")
    env = TrapEnvelope(envelope_factor * a0)
    run = lambda b: run_trial(family, b, zv, env, dt, T_final, sample_dt, precision)  # noqa: E731
    t_lo, t_hi = run(lo), run(hi)
    trials = [t_lo, t_hi]
    if t_lo.exit_side == 0 or t_hi.exit_side == 0 or t_lo.exit_side == t_hi.exit_side:
        raise BracketError(f"bracket ends exit on sides {t_lo.exit_side}, {t_hi.exit_side}")
    s_lo = t_lo.exit_side
    brackets = [(float(lo.hi), float(hi.hi))]
    trapped = None
    it = 0
    scale = max(abs(bracket[0]), abs(bracket[1]))
    while it < max_iter:
        it += 1
        mid = dd_midpoint(lo, hi)
        tr = run(mid)
        trials.append(tr)
        side = tr.exit_side
        if side == 0:
            trapped = tr
            if not refine_trapped:
                break
            side = 1 if tr.a_plus[-1] > 0 else -1
        if side == s_lo:
            lo = mid
        else:
            hi = mid
        brackets.append((float(lo.hi + lo.lo), float(hi.hi + hi.lo)))
        width = hi - lo
        if abs(float(width.hi + width.lo)) < tol * scale:
            break
    if trapped is None:
        mid = dd_midpoint(lo, hi)
        trapped = run(mid)
        trials.append(trapped)
    best = DD(np.float64(trapped.b0), np.float64(0.0)) if trapped.exit_side == 0 else mid
    if trapped.exit_side == 0 and refine_trapped:
        best = mid
    return ShootingOutcome(float(best.hi), float(best.lo), brackets, trials, trapped, env, it, precision)


def escape_rate_samples(outcome: ShootingOutcome, mu: float) -> tuple[int, int]:
    """Count samples with |a_+| in (lambda/2, lambda) and those with d(a_+^2)/dt >= mu a_+^2.

    Derivatives are centred differences of the recorded series; only exited trials count.
    """
    total = good = 0
    for tr in outcome.trials:
        if tr.exit_side == 0 or tr.times.size < 3:
            continue
        a2 = tr.a_plus ** 2
        d = np.gradient(a2, tr.times)
        band = (np.abs(tr.a_plus) > 0.5 * tr.envelope) & (np.abs(tr.a_plus) < tr.envelope)
        band[[0, -1]] = False
        total += int(band.sum())
        good += int(np.sum(d[band] >= mu * a2[band]))
    return good, total
