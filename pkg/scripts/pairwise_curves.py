"""Pair probabilities p00, p01, p11 and the component correlation along a
p grid, for several nu, written as plot-ready CSV.

    python3 scripts/pairwise_curves.py --m 3 --nu 0 1 4 --out results/pairwise_m3.csv
"""

import argparse

import numpy as np

from combdist.comb import CombParams
from combdist.exchangeable import component_correlation, pairwise_curve
from combdist.io import csv_text, write_atomic


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=3)
    ap.add_argument("--nu", type=float, nargs="+", default=[0.0, 1.0, 4.0])
    ap.add_argument("--steps", type=int, default=99)
    ap.add_argument("--out")
    args = ap.parse_args()

    p_grid = np.linspace(0.0, 1.0, args.steps + 2)[1:-1]
    rows = []
    for nu in args.nu:
        for p, pp in pairwise_curve(args.m, nu, p_grid):
            rows.append((nu, p, pp.p00, pp.p01, pp.p11, component_correlation(CombParams(args.m, p, nu))))
    text = csv_text(("nu", "p", "p00", "p01", "p11", "rho"), rows)
    if args.out:
        write_atomic(args.out, text)
    else:
        print(text, end="")

    bound = -1.0 / (args.m - 1)
    for nu in args.nu:
        rho = [r[5] for r in rows if r[0] == nu]
        print(f"# nu = {nu:g}: rho in [{min(rho):.4f}, {max(rho):.4f}], lower limit {bound:.4f}")


if __name__ == "__main__":
    main()
