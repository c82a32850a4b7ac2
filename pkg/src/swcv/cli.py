"""Command-line interface.

Subcommands:

* ``estimate``   one sliced-distance estimate between two point-cloud files
* ``bench``      a seeded benchmark suite written as CSV (plus a figure)
* ``gram``       kernel Gram matrix of a directory of measure files
* ``basis-info`` counts and conditioning diagnostics of a harmonic basis
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench as bench_mod
from . import estimators
from .harmonics import build_basis, count_degree
from .kernel import gram_mc, gram_shcv
from .measures import load_point_cloud
from .sphere import sample_uniform

_ESTIMATE_METHODS = ("mc", "shcv", "cvlow", "cvup", "cvnn", "qmc", "rqmc")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _add_estimate(sub):
    p = sub.add_parser("estimate", help="estimate SW_p^p between two point clouds")
    p.add_argument("--input-a", required=True, help="first point-cloud file")
    p.add_argument("--input-b", required=True, help="second point-cloud file")
    p.add_argument("--p", type=float, default=2.0, help="transport order (default 2)")
    p.add_argument("--method", choices=_ESTIMATE_METHODS, default="mc")
    p.add_argument("--n", type=int, default=500, help="number of directions")
    p.add_argument("--degree", type=int, default=4, help="max harmonic degree 2L (shcv)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weighted", action="store_true",
                   help="parse the final column of the inputs as weights")


def _cmd_estimate(args) -> int:
    mu = load_point_cloud(args.input_a, weighted=args.weighted)
    nu = load_point_cloud(args.input_b, weighted=args.weighted)
    if mu.d != nu.d:
        raise SystemExit(f"dimension mismatch: {mu.d} vs {nu.d}")
    method = args.method
    if method == "qmc":
        report = estimators.qmc_estimate(mu, nu, args.p, args.n, kind="sobol")
    elif method == "rqmc":
        report = estimators.rqmc_estimate(mu, nu, args.p, args.n, kind="halton", seed=args.seed)
    else:
        dirs = sample_uniform(args.n, mu.d, args.seed)
        if method == "mc":
            from .wasserstein1d import IntegrandHandle

            report = estimators.mc_estimate(IntegrandHandle(mu, nu, args.p).evaluate_many(dirs))
        elif method == "cvlow":
            report = estimators.cv_lower(mu, nu, args.p, dirs)
        elif method == "cvup":
            report = estimators.cv_upper(mu, nu, args.p, dirs)
        elif method == "cvnn":
            report = estimators.cvnn(mu, nu, args.p, dirs, seed=args.seed)
        else:
            basis = build_basis(mu.d, args.degree, seed=args.seed)
            report = estimators.shcv(mu, nu, args.p, dirs, basis)
    print(f"method={method} n={args.n} p={args.p:g} estimate={_fmt(report.estimate)} "
          f"wall_time_ms={report.wall_time * 1000.0:.3f}"
          + (" degenerate_control=1" if report.degenerate_control else ""))
    return 0


def _add_bench(sub):
    p = sub.add_parser("bench", help="run a seeded benchmark suite")
    p.add_argument("--scenario", choices=bench_mod.SCENARIOS, required=True)
    p.add_argument("--d", type=int, default=3, help="ambient dimension")
    p.add_argument("--n-grid", default="100,250,500,1000",
                   help="comma-separated strictly increasing direction counts")
    p.add_argument("--methods", default="mc,shcv", help="comma-separated method names")
    p.add_argument("--reps", type=int, default=100, help="replications per cell")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--degree", type=int, default=4, help="max harmonic degree 2L")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--m", type=int, default=1000, help="sample size for sampled scenarios")
    p.add_argument("--gamma", type=float, default=2.0,
                   help="covariance ratio of the exactness-check scenario")
    p.add_argument("--input-a", help="point-cloud file (pointcloud scenario)")
    p.add_argument("--input-b", help="point-cloud file (pointcloud scenario)")
    p.add_argument("--max-functions", type=int, default=None,
                   help="cap on the number of harmonic control variates")
    p.add_argument("--n-ref", type=int, default=10**7,
                   help="directions for the reference ground truth")
    p.add_argument("--cache-dir", default=None, help="ground-truth cache directory")
    p.add_argument("--plot", default=None,
                   help="figure path (default: CSV path with .png suffix)")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def _cmd_bench(args) -> int:
    cfg = bench_mod.BenchmarkConfig(
        scenario=args.scenario,
        d=args.d,
        n_grid=tuple(int(tok) for tok in args.n_grid.split(",") if tok),
        methods=tuple(tok for tok in args.methods.split(",") if tok),
        replications=args.reps,
        base_seed=args.seed,
        degree=args.degree,
        m=args.m,
        gamma=args.gamma,
        input_a=args.input_a,
        input_b=args.input_b,
        max_functions=args.max_functions,
    )
    truth, stderr = bench_mod.ground_truth(
        cfg, n_ref=args.n_ref, cache_dir=args.cache_dir, with_stderr=True
    )
    print(f"ground truth = {_fmt(truth)} (stderr {stderr:.3g})", file=sys.stderr)
    rows = bench_mod.run_benchmark(cfg, cache_dir=args.cache_dir, truth=truth)
    bench_mod.write_rows_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    for cell in bench_mod.summarize(rows):
        print(f"{cell['method']:>6s} n={cell['n']:<6d} mse={cell['mse']:.6e} "
              f"time={cell['mean_time_ms']:.3f}ms +- {cell['time_sd_ms']:.3f}")
    if not args.no_plot:
        from .plotting import render_benchmark_figure

        fig_path = args.plot or str(Path(args.out).with_suffix(".png"))
        render_benchmark_figure(rows, fig_path, title=f"{cfg.scenario} (d={cfg.d})")
        print(f"wrote figure to {fig_path}", file=sys.stderr)
    return 0


def _add_gram(sub):
    p = sub.add_parser("gram", help="kernel Gram matrix of a directory of measures")
    p.add_argument("directory", help="directory of point-cloud/histogram files (*.txt)")
    p.add_argument("--gamma", type=float, required=True, help="kernel bandwidth")
    p.add_argument("--n", type=int, required=True, help="number of directions")
    p.add_argument("--method", choices=("mc", "shcv"), default="shcv")
    p.add_argument("--degree", type=int, default=4, help="max harmonic degree 2L (shcv)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=float, default=2.0, help="transport order of the kernel")
    p.add_argument("--weighted", action="store_true",
                   help="parse the final column of each file as weights")
    p.add_argument("--out", required=True, help="output CSV path")


def _cmd_gram(args) -> int:
    paths = sorted(Path(args.directory).glob("*.txt"))
    if not paths:
        raise SystemExit(f"no *.txt measure files under {args.directory}")
    measures = [load_point_cloud(p, weighted=args.weighted) for p in paths]
    for idx, p in enumerate(paths):
        print(f"measure {idx}: {p.name}", file=sys.stderr)
    if args.method == "mc":
        result = gram_mc(measures, None, args.gamma, args.n, args.seed, p=args.p)
    else:
        basis = build_basis(measures[0].d, args.degree, seed=args.seed)
        result = gram_shcv(measures, None, args.gamma, args.n, basis, args.seed, p=args.p)
    with open(args.out, "w") as fh:
        fh.write("i,j,k_value\n")
        mat = result.matrix
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                fh.write(f"{i},{j},{_fmt(mat[i, j])}\n")
    print(f"wrote {mat.shape[0] * mat.shape[1]} entries to {args.out}", file=sys.stderr)
    return 0


def _add_basis_info(sub):
    p = sub.add_parser("basis-info", help="print counts and conditioning of a basis")
    p.add_argument("--d", type=int, required=True, help="ambient dimension")
    p.add_argument("--degree", type=int, required=True, help="max harmonic degree 2L")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-functions", type=int, default=None)


def _cmd_basis_info(args) -> int:
    basis = build_basis(args.d, args.degree, seed=args.seed, max_functions=args.max_functions)
    print(f"dimension d = {basis.dim}")
    print(f"max degree  = {basis.max_degree}")
    for block in basis.blocks:
        ratio = block.diag_ratio
        cond = "exact closed form" if ratio is None else f"diag ratio {ratio:.3e}"
        note = "" if block.count == block.full_count else f" (of {block.full_count})"
        print(f"  degree {block.degree:>3d}: {block.count}{note} functions "
              f"[dim {count_degree(args.d, block.degree)}], {cond}")
    print(f"total s     = {basis.size}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="swcv",
        description="Sliced-Wasserstein estimation with spherical-harmonics "
        "control variates and baseline estimators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_estimate(sub)
    _add_bench(sub)
    _add_gram(sub)
    _add_basis_info(sub)
    args = parser.parse_args(argv)
    handlers = {
        "estimate": _cmd_estimate,
        "bench": _cmd_bench,
        "gram": _cmd_gram,
        "basis-info": _cmd_basis_info,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
