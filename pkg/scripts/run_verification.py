#!/usr/bin/env python3
"""Run the numerical property suites and write a per-check CSV."""
import argparse
import sys

from fdemg.cli import main
from fdemg.verification import SUITES

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--suite", choices=SUITES, default="all")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results")
    a = ap.parse_args()
    sys.exit(main(["--out-dir", a.out_dir, "verify", "--suite", a.suite, "--seed", str(a.seed)]))
