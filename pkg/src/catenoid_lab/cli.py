"""Command-line runner: one subcommand per experiment, CSV/JSON outputs plus manifest.json.

Exit codes: 0 success, 1 invalid config, 2 a suite criterion failed,
3 a numerical module raised (message carries the subcommand).
``CATENOID_LAB_OUTPUT_DIR`` overrides the configured output directory.
Everything except the wall-clock timings in manifest.json is a deterministic
function of the config.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, darboux, flat_oracle
from .acceptance import _project, run_suite
from .config import ConfigError, ExperimentConfig, load_config
from .evolution import Evolver, SourceSpec, compact_bump
from .geometry import Geometry, RadialGrid
from .modulation import (
    TRANSLATION_SECTORS,
    UNSTABLE_SECTOR,
    FirstOrderVector,
    ZVectors,
    d_matrix,
    project_unstable,
)
from .operators import assemble, eigen_unstable, kernel_residuals, SpectrumMismatch
from .shooting import analytic_b0, classify_directions, random_family, shoot

ENV_OUTPUT = "CATENOID_LAB_OUTPUT_DIR"

__all__ = ["RunManifest", "main", "run", "ENV_OUTPUT"]


class SubcommandError(RuntimeError):
    def __init__(self, subcommand: str, exc: BaseException):
        super().__init__(f"{subcommand}: {type(exc).__name__}: {exc}")
        self.subcommand = subcommand


@dataclass
class RunManifest:
    subcommand: str
    config_hash: str
    version: str = __version__
    outputs: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    status: str = "ok"

    def to_json(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "config_hash": self.config_hash,
            "version": self.version,
            "outputs": sorted(self.outputs),
            "timings": self.timings,
            "status": self.status,
        }


# ---------------------------------------------------------------- writers


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    return x


class _Writer:
    def __init__(self, out_dir: Path, manifest: RunManifest):
        self.dir = out_dir
        self.manifest = manifest
        out_dir.mkdir(parents=True, exist_ok=True)

    def json(self, name: str, obj) -> Path:
        path = self.dir / name
        path.write_text(json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")
        self.manifest.outputs.append(name)
        return path

    def csv(self, name: str, columns: dict) -> Path:
        path = self.dir / name
        keys = list(columns)
        n = len(next(iter(columns.values()))) if columns else 0
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(keys)
            for i in range(n):
                wr.writerow([repr(float(columns[k][i])) for k in keys])
        self.manifest.outputs.append(name)
        return path


# ---------------------------------------------------------------- subcommands


def _geometry(cfg: ExperimentConfig) -> Geometry:
    return Geometry.build(RadialGrid(cfg.grid.rho_max, cfg.grid.n_points))


def cmd_profile(cfg, args, out: _Writer):
    g = _geometry(cfg)
    out.csv("profile.csv", {
        "rho": g.rho, "f": g.profile.f_values, "z": g.profile.z_values, "weight": g.weight, "V": g.V,
        "nu0": g.modes.nu0, "phi_odd": g.modes.phi_odd, "phi_even": g.modes.phi_even,
    })
    out.json("profile.json", {"S": g.profile.S, "S_alt": g.profile.S_alt,
                              "first_integral_residual": float(np.max(g.profile.first_integral_residual())),
                              "n_points": g.grid.n_points, "h": g.h})


def cmd_spectrum(cfg, args, out: _Writer):
    g = _geometry(cfg)
    op = assemble(args.ell, g)
    res = kernel_residuals(g)
    report = {"ell": args.ell, "eigenvalues": op.eigenvalues(args.k).tolist()}
    if args.ell == 0:
        try:
            rep = eigen_unstable(op, rtol=args.rtol)
        except SpectrumMismatch as exc:
            raise SubcommandError("spectrum", exc) from exc
        report.update(mu2=rep.mu2, mu2_raw=rep.mu2_raw, mu2_shooting=rep.mu2_shooting)
        report["residuals"] = {k: v for k, v in res.items() if k.startswith("H0")}
    else:
        report["residuals"] = {k: v for k, v in res.items() if k == "H1_nu0"} if args.ell == 1 else {}
    out.json(f"spectrum_ell{args.ell}.json", report)


def cmd_darboux(cfg, args, out: _Writer):
    g = _geometry(cfg)
    ctx = darboux.DarbouxContext.build(g)
    rng = np.random.default_rng(cfg.seed)
    samples = [np.exp(-(((g.rho - rng.uniform(-10, 10)) / rng.uniform(0.7, 2.0)) ** 2)) for _ in range(10)]
    R = cfg.modulation.R_ctf
    Z0 = darboux.cutoff(g.rho, R) * g.modes.nu0
    roundtrip = 0.0
    for phi in samples:
        datum = float(np.sum(phi * Z0 * g.weight) * g.h)
        back = darboux.invert(darboux.apply_sector(phi, 1, g), datum, g, R)
        roundtrip = max(roundtrip, float(np.max(np.abs(back - phi))))
    spec = darboux.transformed_operator(ctx, seed=cfg.seed)
    out.json("darboux.json", {
        "factorization_defect": darboux.factorization_check(ctx, samples),
        "roundtrip_error": roundtrip,
        "l2_eigenvalues": spec.eigenvalues.tolist(),
        "l2_positive_count": spec.positive_count,
        "vtilde_decay_constant": spec.vtilde_decay_constant,
        "symmetry_defect": spec.symmetry_defect,
        "h": g.h,
    })


def _initial_data(cfg, g):
    data = {}
    for s in cfg.evolution.sectors:
        bump = compact_bump(g.rho, s.center, s.width)
        key = (s.ell, s.m)
        p0, v0 = data.get(key, (np.zeros_like(g.rho), np.zeros_like(g.rho)))
        data[key] = (p0 + s.amplitude * bump, v0 + s.velocity_amplitude * bump)
    return data


def _sources(cfg, g):
    out = []
    for s in cfg.evolution.sources:
        prof = (1.0 + g.rho ** 2) ** (-s.a / 2.0)
        out.append(SourceSpec((s.ell, s.m), prof, tuple(s.time_profile), cutoff=s.cutoff))
    return out


def cmd_evolve(cfg, args, out: _Writer):
    ev_cfg = cfg.evolution
    R_ctf = args.rctf if args.rctf is not None else cfg.modulation.R_ctf
    g = _geometry(cfg)
    dt = ev_cfg.dt_safety * g.h
    ev = Evolver(g, dt, _sources(cfg, g))
    data = _initial_data(cfg, g)
    if args.project:
        lam, phi = assemble(0, g).top_eigenpair()
        zv0 = ZVectors.build(g, R_ctf, math.sqrt(lam), phi)
        data = {k: _project(k, p, v, g, zv0) for k, (p, v) in data.items()}
    state = ev.initial_state(data)
    rows = {"t": [], "a_plus": [], "a_minus": [], **{f"omega{k + 1}": [] for k in range(6)}}
    callback = None
    if args.track_modulation:
        lam, phi = assemble(0, g).top_eigenpair()
        zv = ZVectors.build(g, R_ctf, math.sqrt(lam), phi)

        def callback(st, evolver):
            vecs = {key: FirstOrderVector.from_velocity(st.sectors[key][0], evolver.velocity(st, key), g, key)
                    for key in st.sectors}
            ap = am = 0.0
            if UNSTABLE_SECTOR in vecs:
                ap, am = project_unstable(vecs[UNSTABLE_SECTOR], zv)
            om = zv.omega(vecs)
            rows["t"].append(st.time)
            rows["a_plus"].append(ap)
            rows["a_minus"].append(am)
            for k in range(6):
                rows[f"omega{k + 1}"].append(om[k])

    series = ev.run(state, ev_cfg.T_final, sample_every=ev_cfg.sample_every, alpha=ev_cfg.alpha,
                    probes=ev_cfg.probes, rp_powers=(1, 2), R_tilde=ev_cfg.R_tilde, callback=callback)
    cols = series.as_columns()
    for r, vals in series.probes.items():
        cols[f"psi_at_{r:g}"] = vals
    out.csv("evolve.csv", cols)
    if args.track_modulation:
        out.csv("modulation.csv", rows)
        out.json("modulation.json", {"R_ctf": R_ctf, "d_matrix": d_matrix(zv).tolist() if R_ctf >= 4 else None,
                                     "sectors_tracked": [list(s) for s in TRANSLATION_SECTORS + (UNSTABLE_SECTOR,)]})


def cmd_shoot(cfg, args, out: _Writer):
    sc = cfg.shooting
    g = Geometry.build(RadialGrid.from_spacing(sc.rho_max, sc.h))
    lam, phi = assemble(0, g).top_eigenpair()
    mu = math.sqrt(lam)
    zv = ZVectors.build(g, cfg.modulation.R_ctf, mu, phi)
    rep = classify_directions(zv, dt=sc.dt)
    fam = random_family(g, zv, np.random.default_rng(cfg.seed), support=sc.support, report=rep)
    res = shoot(fam, zv, tuple(sc.bracket), dt=sc.dt, T_final=sc.T_final, envelope_factor=sc.envelope_factor,
                tol=sc.tol, precision=sc.precision, refine_trapped=sc.precision == "dd")
    oracle = analytic_b0(fam, phi, mu, g, 1.0 if rep.growing == "plus" else -1.0)
    tr = res.trapped
    out.json("shoot.json", {
        "b0_star": res.b0_star, "b0_star_lo": res.b0_star_lo, "b0_oracle": oracle,
        "relative_error": abs(res.b0_star - oracle) / abs(oracle), "iterations": res.iterations,
        "precision": res.precision, "lambda0": res.envelope.lambda0, "mu": mu,
        "growing_direction": rep.growing, "trapped_exit_side": tr.exit_side, "trapped_exit_time": tr.exit_time,
        "exit_sides": res.exit_sides, "brackets": [[float(a), float(b)] for a, b in res.brackets],
    })
    out.csv("shoot_trajectory.csv", {"t": tr.times, "a_plus": tr.a_plus, "envelope": tr.envelope})


def cmd_tails(cfg, args, out: _Writer):
    tc = cfg.tails
    a = args.a if args.a is not None else tc.a
    b = args.b if args.b is not None else tc.b
    fits = flat_oracle.dichotomy_experiment(a, b, tc.probes, tuple(tc.window), tc.n_times)
    sol = flat_oracle.OracleSolution(flat_oracle.TailSource(a, b))
    ts = flat_oracle.sample_times(tuple(tc.window), tc.n_times)
    cols = {"t": ts}
    for r in tc.probes:
        cols[f"u_at_{r:g}"] = [sol(t, r) for t in ts]
    out.csv("tails.csv", cols)
    ray = flat_oracle.ray_exponent(a, b, window=tuple(tc.window), n=tc.n_times)
    out.json("tails.json", {"a": a, "b": b, "window": list(tc.window),
                            "exponents": {r: {"exponent": f.exponent, "stderr": f.stderr} for r, f in fits.items()},
                            "ray_exponent": ray.exponent})


def cmd_suite(cfg, args, out: _Writer):
    only = set(args.only) if args.only else None
    results = run_suite(cfg, only, echo=print)
    out.manifest.timings.update({f"criterion_{r.number}": round(r.runtime, 3) for r in results})
    report = {"criteria": [], "passed": all(r.passed for r in results)}
    for r in results:
        d = r.to_json()
        d.pop("runtime")
        d.pop("within_budget")
        report["criteria"].append(d)
    out.json("report.json", report)
    return 0 if report["passed"] else 2


COMMANDS = {
    "profile": cmd_profile,
    "spectrum": cmd_spectrum,
    "darboux-check": cmd_darboux,
    "evolve": cmd_evolve,
    "shoot": cmd_shoot,
    "tails": cmd_tails,
    "suite": cmd_suite,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="catenoid-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="YAML or JSON config file")
        return p

    add("profile", "catenoid profile, metric weight and potential on the grid")
    p = add("spectrum", "top eigenvalues of one angular sector")
    p.add_argument("--ell", type=int, default=0)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--rtol", type=float, default=1e-5, help="matrix vs shooting tolerance for mu^2")
    add("darboux-check", "factorization, transformed spectrum and roundtrip")
    p = add("evolve", "leapfrog evolution with norm time series")
    p.add_argument("--rctf", type=float, default=None, help="cutoff radius for truncated modes")
    p.add_argument("--track-modulation", action="store_true")
    p.add_argument("--project", action="store_true", help="remove a_pm and kernel pairings from the data")
    add("shoot", "bisection for the trapped initial datum")
    p = add("tails", "flat-space tail exponents from the exact solution")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p = add("suite", "run the acceptance criteria")
    p.add_argument("--only", type=int, nargs="*", help="criterion numbers")
    return ap


def run(command: str, cfg: ExperimentConfig, args: argparse.Namespace) -> tuple[RunManifest, int]:
    out_dir = Path(os.environ.get(ENV_OUTPUT) or cfg.output_dir) / command
    manifest = RunManifest(command, cfg.hash())
    writer = _Writer(out_dir, manifest)
    writer.json("config.json", cfg.to_dict())
    t0 = time.perf_counter()
    try:
        code = COMMANDS[command](cfg, args, writer) or 0
    except SubcommandError:
        raise
    except Exception as exc:  # noqa: BLE001
        raise SubcommandError(command, exc) from exc
    manifest.timings["total"] = round(time.perf_counter() - t0, 3)
    manifest.status = "ok" if code == 0 else "criterion_failed"
    (out_dir / "manifest.json").write_text(json.dumps(manifest.to_json(), indent=2, sort_keys=True) + "\n")
    return manifest, code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"config error: <file>: {exc}", file=sys.stderr)
        return 1
    try:
        manifest, code = run(args.command, cfg, args)
    except SubcommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"{args.command}: wrote {len(manifest.outputs)} files to "
          f"{Path(os.environ.get(ENV_OUTPUT) or cfg.output_dir) / args.command}")
    return code


if __name__ == "__main__":
    sys.exit(main())
