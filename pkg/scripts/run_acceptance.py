"""Run the acceptance criteria and print one line per criterion.

    python scripts/run_acceptance.py [--config cfg.yaml] [--only 1 3 9]
"""
import argparse
import json
import sys

from catenoid_lab.acceptance import run_suite
from catenoid_lab.config import load_config


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config")
    ap.add_argument("--only", type=int, nargs="*")
    ap.add_argument("--json", help="also write measured values here")
    args = ap.parse_args()
    results = run_suite(load_config(args.config), set(args.only) if args.only else None, echo=print)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.to_json() for r in results], fh, indent=2, sort_keys=True)
    return 0 if all(r.passed for r in results) else 2


if __name__ == "__main__":
    sys.exit(main())
