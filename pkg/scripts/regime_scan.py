#!/usr/bin/env python3
"""Small (lambda, K_omega) regime scan with CSV + SVG output.

Reproduces the qualitative picture of the parameter plane: invariant curves
at small twisting, phase-locked sinks in the tongues, and positive-exponent
attractor candidates at large twisting.

Usage:
    python scripts/regime_scan.py [--out OUTDIR] [--n-iter N] [--threads T]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from bykovlab import orbits as ob
from bykovlab import svgplot
from bykovlab.model import reference_params, reference_perturbation


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="scan_out")
    ap.add_argument("--n-iter", type=int, default=20_000)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    lam_grid = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
    k_grid = [0.15, 0.45, 1.0, 2.0, 5.0, 8.0, 15.0]
    budget = ob.Budget(n_iter=args.n_iter, burn_in=2_000)
    base = reference_params()
    pert = reference_perturbation()

    result = ob.scan(lam_grid, k_grid, base, pert, budget,
                     threads=args.threads)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "scan.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(ob.SCAN_CSV_COLUMNS) + "\n")
        for row in ob.scan_rows(result):
            fh.write(",".join(str(v) for v in row) + "\n")
    svg_path = os.path.join(args.out, "regime_map.svg")
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write(svgplot.regime_map_svg(result, provenance="regime_scan.py"))

    print(f"wrote {csv_path} and {svg_path}")
    print("empirical boundaries per K_omega column:")
    for k in result.k_grid:
        k = float(k)
        t2 = result.t2_hat.get(k)
        t1 = result.t1_hat.get(k)
        print(f"  K={k:g}: t2_hat={t2}  t1_hat={t1}")
    print(f"t2_hat <= t1_hat on all columns: {result.ordered}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
