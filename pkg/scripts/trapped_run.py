"""Double-double bisection to a trapped run on [0, T]; writes the a_+ trajectory as CSV."""
import argparse
import csv
import math

import numpy as np

from catenoid_lab.geometry import Geometry, RadialGrid
from catenoid_lab.modulation import ZVectors
from catenoid_lab.operators import assemble
from catenoid_lab.shooting import classify_directions, random_family, shoot


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--T", type=float, default=40.0)
    ap.add_argument("--h", type=float, default=0.1)
    ap.add_argument("--dt", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="trapped.csv")
    args = ap.parse_args()
    geo = Geometry.build(RadialGrid.from_spacing(40.0, args.h))
    lam, phi = assemble(0, geo).top_eigenpair()
    zv = ZVectors.build(geo, 8.0, math.sqrt(lam), phi)
    rep = classify_directions(zv, dt=args.dt)
    fam = random_family(geo, zv, np.random.default_rng(args.seed), report=rep)
    out = shoot(fam, zv, dt=args.dt, T_final=args.T, tol=1e-30, precision="dd", refine_trapped=True)
    tr = out.trapped
    print(f"b0* = {out.b0_star!r} + {out.b0_star_lo!r}  iterations={out.iterations}  exit_side={tr.exit_side}")
    print(f"max |a_+| / lambda = {np.max(np.abs(tr.a_plus) / tr.envelope):.3e}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "a_plus", "envelope"])
        w.writerows(zip(tr.times, tr.a_plus, tr.envelope))


if __name__ == "__main__":
    main()
