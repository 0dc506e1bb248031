"""Soybean seed-germination analysis: MAP, Laplace covariance, fitted
frequencies for COMB, binomial and the published CB column, and SSEs.

    python3 scripts/reproduce_soybean.py [--out results/soybean]
"""

import argparse
import time
from pathlib import Path

import numpy as np

from combdist.baselines import PUBLISHED_CB_FIT, sse
from combdist.cli import fit_report
from combdist.inference import laplace_total_variation, map_estimate, sufficient_stats, update_batch
from combdist.io import grid_csv_text, json_text, read_config, read_data_file, write_atomic

DATA = Path(__file__).resolve().parent.parent / "data"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="prefix for <out>.json and <out>_grid.csv")
    args = ap.parse_args()

    start = time.perf_counter()
    table = read_data_file(DATA / "soybean.csv")
    cfg = read_config(DATA / "soybean.cfg")
    report, grid = fit_report(table, cfg, f"{args.out}_grid.csv" if args.out else None)
    elapsed = time.perf_counter() - start

    mp = report["map"]
    print(f"n = {table.n}, m = {table.m}, S1 = {report['sufficient_stats']['S1']}, "
          f"S2 = {report['sufficient_stats']['S2']:.4f}")
    print(f"MAP  psi = {mp['psi']:.4f}  nu = {mp['nu']:.4f}  (p = {mp['p']:.4f}, {mp['iterations']} Newton steps)")
    print(f"grid mode  psi = {report['grid_mode'][0]:.3f}  nu = {report['grid_mode'][1]:.3f}")
    sigma = np.array(mp["sigma"])
    print(f"inverse Hessian  [[{sigma[0, 0]:.4f}, {sigma[0, 1]:.4f}], [{sigma[1, 0]:.4f}, {sigma[1, 1]:.4f}]]")

    post = update_batch(cfg.hyper(table.m), sufficient_stats(table))
    tv = laplace_total_variation(grid, map_estimate(post, cfg.prior(), grid=grid))
    print(f"TV(grid posterior, Laplace normal) = {tv:.4f}")

    print()
    print(f"{'k':>2} {'obs':>4} {'binomial':>9} {'CB (pub.)':>9} {'COMB':>7}")
    for k, obs in enumerate(table.counts):
        print(f"{k:>2} {obs:>4} {report['binomial']['fitted'][k]:>9.2f} "
              f"{PUBLISHED_CB_FIT[k]:>9.2f} {report['comb_fit'][k]:>7.2f}")
    print(f"SSE     {report['sse']['binomial']:>9.2f} {sse(table.counts, PUBLISHED_CB_FIT):>9.2f} "
          f"{report['sse']['comb']:>7.2f}")
    print(f"\nelapsed {elapsed:.2f} s")

    if args.out:
        write_atomic(f"{args.out}_grid.csv", grid_csv_text(grid))
        write_atomic(f"{args.out}.json", json_text(report))


if __name__ == "__main__":
    main()
