#!/usr/bin/env python3
"""Reproduce the three iteration/error tables (CSV + manifest under --out-dir).

    python3 scripts/reproduce_tables.py --sizes 16,32,64,128

The unpreconditioned column at n=128 takes roughly two minutes on one core.
"""
import argparse
import sys

from fdemg.cli import main


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="16,32,64,128")
    ap.add_argument("--tables", default="1,2,3")
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args(argv)
    code = 0
    for t in args.tables.split(","):
        code = max(code, main(["--out-dir", args.out_dir, "table", "--table", t, "--sizes", args.sizes]))
    return code


if __name__ == "__main__":
    sys.exit(run())
