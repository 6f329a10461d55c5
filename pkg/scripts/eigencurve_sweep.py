#!/usr/bin/env python3
"""Eigenvalue-curve sweeps for the scalar degenerate family A=[a], B=[0], C=[c].

For each (a, c) the two eigenvalues of H_tau form a conjugate sqrt-order
pair whose hemicurvature is a/(2 c^2); the sign of a therefore decides
whether large-timescale EG stabilizes the origin for small step sizes.
Writes one eigencurve CSV per instance plus a summary table on stdout.

Usage: python scripts/eigencurve_sweep.py [--out out/curves]
"""

import argparse

from minimaxdyn.cli import main as cli_main
from minimaxdyn.problems import builtin_problem
from minimaxdyn.spectral import eigencurves, hemicurvature, s_zero


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/curves")
    args = ap.parse_args()

    cases = [(2.0, 1.0), (-2.0, 1.0), (4.0, 3.0), (0.0, 1.0)]
    print(f"{'a':>6} {'c':>6} {'iota (numeric)':>16} {'a/(2c^2)':>10} {'s0':>10}")
    for a, c in cases:
        problem = builtin_problem("scalar_degenerate", a=a, c=c)
        curves = eigencurves(problem.quadratic.hessian(), 1)
        iota = hemicurvature(curves, curves.sqrt_indices[0])
        print(f"{a:6.1f} {c:6.1f} {iota:16.6f} {a / (2 * c * c):10.4f} "
              f"{s_zero(curves):10.4f}")
        rc = cli_main(["sweep", "--builtin", "scalar_degenerate",
                       "--a", str(a), "--c", str(c),
                       "--out", f"{args.out}/a{a:g}_c{c:g}"])
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
