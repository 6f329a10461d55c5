#!/usr/bin/env python3
"""Desk-scale reproduction of the degenerate bilinear phenomena.

The origin of f(x, y) = x y has a fully degenerate y-Hessian, so its
timescaled spectrum collapses onto the imaginary axis like +-i sqrt(1/tau).
Two-timescale GDA then spirals away from the origin for every tau, while
two-timescale EG contracts.  This script classifies the origin, sweeps tau
for all three methods, and runs the matching trajectory ensembles.

Usage: python scripts/bilinear_phenomena.py [--n 100] [--out out/bilinear]
"""

import argparse
import json

import numpy as np

from minimaxdyn import stability
from minimaxdyn.cli import main as cli_main
from minimaxdyn.problems import builtin_problem


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--out", default="out/bilinear")
    args = ap.parse_args()

    problem = builtin_problem("bilinear")
    H = problem.quadratic.hessian()
    print("spec(H_tau) along the tau sweep:")
    for tau in (10.0, 100.0, 1000.0):
        from minimaxdyn.spectral import timescaled_hessian

        lams = np.linalg.eigvals(timescaled_hessian(H, tau, 1))
        print(f"  tau = {tau:7.0f}: {np.sort_complex(lams)}  (+- i sqrt(1/tau))")

    rc = cli_main(["classify", "--builtin", "bilinear", "--s", "0.4", "--eta", "0.5",
                   "--out", f"{args.out}/classify"])
    if rc != 0:
        return rc

    for method, tau in (("eg_tt", 10.0), ("gda_tt", 10.0)):
        rc = cli_main([
            "simulate", "--builtin", "bilinear", "--method", method,
            "--eta", "0.5", "--tau", str(tau), "--n", str(args.n),
            "--seed", "0", "--max-iters", "100000", "--tol-conv", "1e-8",
            "--no-trajectories", "--out", f"{args.out}/{method}",
        ])
        if rc != 0:
            return rc
        with open(f"{args.out}/{method}/simulate_summary.json") as fh:
            summary = json.load(fh)
        print(f"{method}: converged fraction {summary['fraction_converged']:.2f}, "
              f"diverged fraction {summary['fraction_diverged']:.2f}")
    print(f"mismatch self-test trips: {stability.mismatch_count()}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
