"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 resource cap exceeded, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import baselines, comb, comm, exchangeable, inference
from .errors import CapExceededError, DomainError, NumericError, OptimizationError
from .io import (
    SCHEMA_VERSION,
    RunConfig,
    csv_text,
    grid_csv_text,
    json_text,
    read_compositions,
    read_config,
    read_data_file,
    write_atomic,
)

EXIT_INPUT, EXIT_CAP, EXIT_NUMERIC = 2, 3, 4
MAX_CLI_CATEGORIES = 4


def _floats(text):
    try:
        return tuple(float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(text, out=None):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _load_config(args) -> RunConfig:
    cfg = read_config(args.config) if getattr(args, "config", None) else RunConfig()
    return cfg


# ---------------------------------------------------------------- commands


def cmd_pmf(args):
    if args.psi is not None:
        if args.p is not None:
            raise DomainError("give either --p or --psi, not both")
        probs = comb.pmf_natural_table(comb.CombNatural(args.m, args.psi, args.nu))
    else:
        if args.p is None:
            raise DomainError("one of --p or --psi is required")
        probs = comb.pmf_table(comb.CombParams(args.m, args.p, args.nu))
    _emit(csv_text(("k", "pmf"), enumerate(probs)), args.out)


def fit_report(table: inference.FrequencyTable, cfg: RunConfig, grid_path: str | None = None):
    """Run the conjugate analysis and return (report dict, posterior grid)."""
    stats = inference.sufficient_stats(table)
    prior_hyper = cfg.hyper(table.m)
    post = inference.update_batch(prior_hyper, stats)
    prior = cfg.prior()
    grid = inference.grid_posterior(post, cfg.grid(), prior)
    mp = inference.map_estimate(post, prior, grid=grid, tol=cfg.tol,
                                max_iter=cfg.max_iter, step=cfg.fd_step)
    fitted = inference.fitted_counts(mp, table.m, table.n)
    p_hat, bin_fit = baselines.binomial_mle_fit(table)
    report = {
        "schema_version": SCHEMA_VERSION,
        "data": {"m": table.m, "n": table.n, "counts": list(table.counts)},
        "sufficient_stats": {"S1": stats.S1, "S2": stats.S2, "n": stats.n},
        "prior": {
            "a": prior_hyper.a, "b": prior_hyper.b, "c": prior_hyper.c,
            "psi_mean": prior.psi_mean, "psi_var": prior.psi_var,
            "nu_mean": prior.nu_mean, "nu_var": prior.nu_var,
        },
        "posterior_hyper": {"a": post.a, "b": post.b, "c": post.c},
        "map": {
            "psi": mp.psi_hat,
            "nu": mp.nu_hat,
            "p": comb.logistic(mp.psi_hat),
            "sigma": mp.sigma,
            "iterations": mp.iterations,
            "grad_norm": mp.grad_norm,
        },
        "grid_mode": list(grid.mode()),
        "comb_fit": fitted,
        "binomial": {"p_hat": p_hat, "fitted": bin_fit},
        "sse": {
            "comb": baselines.sse(table.counts, fitted),
            "binomial": baselines.sse(table.counts, bin_fit),
        },
        "grid_csv": grid_path,
    }
    return report, grid


def cmd_fit(args):
    cfg = _load_config(args)
    table = read_data_file(args.datafile, args.m)
    prefix = args.out or cfg.out or None
    grid_path = f"{prefix}_grid.csv" if prefix else None
    report, grid = fit_report(table, cfg, grid_path)
    text = json_text(report)
    if prefix:
        # everything is computed before the first file is written
        grid_text = grid_csv_text(grid)
        write_atomic(grid_path, grid_text)
        write_atomic(f"{prefix}.json", text)
    sys.stdout.write(text)


def cmd_posterior_grid(args):
    cfg = _load_config(args)
    table = read_data_file(args.datafile, args.m)
    post = inference.update_batch(cfg.hyper(table.m), inference.sufficient_stats(table))
    grid = inference.grid_posterior(post, cfg.grid(), cfg.prior())
    _emit(grid_csv_text(grid), args.out)


def cmd_pairwise(args):
    if args.steps < 2:
        raise DomainError("--steps must be at least 2")
    p_grid = np.linspace(0.0, 1.0, args.steps + 2)[1:-1]
    rows = [(p, pp.p00, pp.p01, pp.p11) for p, pp in exchangeable.pairwise_curve(args.m, args.nu, p_grid)]
    _emit(csv_text(("p", "p00", "p01", "p11"), rows), args.out)


def cmd_sample(args):
    params = comb.CombParams(args.m, args.p, args.nu)
    draws = comb.sample(params, args.n, args.seed)
    _emit("".join(f"{d}\n" for d in draws), args.out)


def cmd_comm(args):
    if args.action == "pmf":
        p = args.p
        if not 2 <= len(p) <= MAX_CLI_CATEGORIES:
            raise DomainError(f"the CLI supports 2..{MAX_CLI_CATEGORIES} categories, got {len(p)}")
        params = comm.CommParams(args.m, p, args.nu)
        K, probs = comm.comm_pmf_table(params, cap=args.cap)
        rows = [tuple(int(x) for x in k) + (pr,) for k, pr in zip(K, probs)]
        header = tuple(f"k{i + 1}" for i in range(params.r)) + ("pmf",)
        _emit(csv_text(header, rows), args.out)
    elif args.action == "stats":
        samples = read_compositions(args.datafile)
        if not 2 <= len(samples[0]) <= MAX_CLI_CATEGORIES:
            raise DomainError(f"the CLI supports 2..{MAX_CLI_CATEGORIES} categories")
        s0, s = comm.comm_sufficient_stats(samples)
        _emit(json_text({"schema_version": SCHEMA_VERSION, "n": len(samples), "S0": s0, "S": s}), args.out)
    elif args.action == "update":
        k = comm.CompositionIndex(args.k)
        if k.r > MAX_CLI_CATEGORIES:
            raise DomainError(f"the CLI supports 2..{MAX_CLI_CATEGORIES} categories")
        a = args.a if args.a is not None else (0.0,) * (k.r - 1)
        h = comm.comm_conjugate_update(comm.CommHyper(a, args.b, args.c), k)
        _emit(json_text({"schema_version": SCHEMA_VERSION, "a": h.a, "b": h.b, "c": h.c}), args.out)


def cmd_propriety(args):
    if args.datafile:
        cfg = _load_config(args)
        table = read_data_file(args.datafile, args.m)
        hyper = inference.update_batch(cfg.hyper(table.m), inference.sufficient_stats(table))
        prior = cfg.prior()
    else:
        if args.m is None:
            raise DomainError("--m is required without a data file")
        hyper = inference.Hyperparams(args.a, args.b, args.c, args.m)
        prior = inference.DEFAULT_PRIOR
    rep = inference.propriety_check(hyper, args.levels, prior)
    report = {
        "schema_version": SCHEMA_VERSION,
        "hyper": {"a": hyper.a, "b": hyper.b, "c": hyper.c, "m": hyper.m},
        "half_widths": rep.half_widths,
        "log_masses": [x if math.isfinite(x) else None for x in rep.log_masses],
        "relative_tails": [x if math.isfinite(x) else None for x in rep.relative_tails],
        "boundary_log_gap": rep.boundary_log_gap,
        "threshold": rep.threshold,
        "passed": rep.passed,
    }
    _emit(json_text(report), args.out)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="combdist", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="COMB pmf table")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--psi", type=float)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pmf)

    def data_args(q):
        q.add_argument("datafile")
        q.add_argument("--m", type=int, help="required for raw observation files")
        q.add_argument("--config", help="key = value settings file")

    p = sub.add_parser("fit", help="conjugate fit with MAP, Laplace and baselines")
    data_args(p)
    p.add_argument("--out", help="path prefix for <prefix>.json and <prefix>_grid.csv")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("posterior-grid", help="normalized posterior density on a lattice")
    data_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_posterior_grid)

    p = sub.add_parser("pairwise", help="pair probabilities p00, p01, p11 along a p grid")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--steps", type=int, default=99)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("sample", help="seeded COMB draws, one per line")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("comm", help="Conway-Maxwell multinomial tools")
    csub = p.add_subparsers(dest="action", required=True)
    q = csub.add_parser("pmf")
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--p", type=_floats, required=True, help="comma-separated probabilities")
    q.add_argument("--nu", type=float, required=True)
    q.add_argument("--cap", type=int, default=comm.DEFAULT_CAP)
    q.add_argument("--out")
    q = csub.add_parser("stats")
    q.add_argument("datafile", help="one comma-separated composition per line")
    q.add_argument("--out")
    q = csub.add_parser("update")
    q.add_argument("--k", type=_ints, required=True)
    q.add_argument("--a", type=_floats)
    q.add_argument("--b", type=float, default=0.0)
    q.add_argument("--c", type=float, default=0.0)
    q.add_argument("--out")
    p.set_defaults(func=cmd_comm)

    p = sub.add_parser("propriety", help="nested-box integration of the posterior kernel")
    p.add_argument("datafile", nargs="?")
    p.add_argument("--m", type=int)
    p.add_argument("--config")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_propriety)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CapExceededError as e:
        print(f"error: {e} (|D| = {e.size})" if e.size else f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except (NumericError, OptimizationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
