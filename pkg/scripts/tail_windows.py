"""Fitted tail exponents of the exact flat solution over successive time windows.

Shows the approach of the (a, b) = (4, 2.5) exponent to -2.5 at late times.
"""
import argparse

from catenoid_lab.flat_oracle import dichotomy_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--a", type=float, default=4.0)
    ap.add_argument("--b", type=float, default=2.5)
    ap.add_argument("--probes", type=float, nargs="*", default=[1.0, 5.0])
    args = ap.parse_args()
    windows = [(50.0, 800.0), (100.0, 1600.0), (250.0, 4000.0), (1000.0, 16000.0)]
    print("t0,t1," + ",".join(f"r={r:g}" for r in args.probes))
    for w in windows:
        fits = dichotomy_experiment(args.a, args.b, tuple(args.probes), w, 24)
        print(f"{w[0]:g},{w[1]:g}," + ",".join(f"{fits[r].exponent:.4f}" for r in args.probes))


if __name__ == "__main__":
    main()
