#!/usr/bin/env python3
"""Measure-zero avoidance experiments.

Two runs:
  * two-timescale EG started near a strict non-minimax point (negative
    eigenvalue of the restricted Schur complement) -- no initialization
    should converge back to it;
  * two-timescale GDA started near the bilinear origin, a degenerate local
    minimax point with hemicurvature 0 < eta/2 -- GDA avoids it even though
    EG would converge.

Usage: python scripts/avoidance_experiment.py [--n 500] [--out out/avoidance]
"""

import argparse
import json

from minimaxdyn.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--out", default="out/avoidance")
    args = ap.parse_args()

    runs = [
        ("eg_tt", "strict_nonminimax_demo"),
        ("gda_tt", "bilinear"),
    ]
    for method, name in runs:
        out = f"{args.out}/{name}_{method}"
        rc = cli_main(["avoidance", "--builtin", name, "--method", method,
                       "--n", str(args.n), "--seed", "0", "--out", out])
        if rc != 0:
            return rc
        with open(f"{out}/avoidance_summary.json") as fh:
            summary = json.load(fh)
        print(f"{name} under {method}: fraction to target = "
              f"{summary['fraction_to_target']:.4f} "
              f"(eta = {summary['eta']:.4f}, tau = {summary['tau']:g})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
