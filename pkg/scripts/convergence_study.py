#!/usr/bin/env python3
"""Print final-time errors and observed orders for one example and preconditioner."""
import argparse

import numpy as np

from fdemg.fde_driver import solve_example


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--example", type=int, default=3, choices=(1, 2, 3))
    ap.add_argument("--sizes", default="8,16,32,64")
    ap.add_argument("--precond", default="mgm")
    args = ap.parse_args()
    prev = None
    for n in map(int, args.sizes.split(",")):
        rep = solve_example(args.example, n, args.precond)
        order = np.log2(prev / rep.final_error_inf) if prev else float("nan")
        print(f"n={n:4d}  error_inf={rep.final_error_inf:.4e}  order={order:.3f}  avg_iters={rep.avg_iterations:.3f}")
        prev = rep.final_error_inf


if __name__ == "__main__":
    main()
