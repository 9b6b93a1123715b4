"""``mip``: minimum information partitions from the command line.

Exit status: 0 on success, 1 when ``mip check`` finds a violation, 2 on bad
input or arguments, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .datagen import CmlParams, gen_block_correlated, gen_random_gaussian, simulate_cml
from .errors import InputError, MipError, NumericalError
from .exhaustive import exhaustive_bipartition, exhaustive_kpartition
from .kpartition import hierarchical_bipartition, minimize_kpartition, total_correlation_loss
from .loss import GaussianMIOracle, GaussianSystem, covariance_from_samples, entropy_oracle
from .queyranne import minimize_bipartition
from .report import RunReport, read_matrix_csv, write_matrix_csv, write_rows_csv
from .sets import GroundSet, check_submodular, check_symmetric

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def load_system(path, kind: str, labels: list[str] | None) -> tuple[GaussianSystem, list[str] | None, dict]:
    """Gaussian system from a samples or covariance CSV, plus labels and a descriptor."""
    data, header = read_matrix_csv(path)
    if kind == "covariance":
        if header is not None:
            raise InputError("covariance input must be a bare square numeric matrix")
        if data.shape[0] != data.shape[1]:
            raise InputError(f"covariance must be square, got {data.shape[0]}x{data.shape[1]}")
        system = GaussianSystem(data)
    else:
        system = covariance_from_samples(data)
    if system.n < 2:
        raise InputError("need at least two variables")
    if system.jitter > 0:
        print(f"mip: covariance is not positive definite; added {system.jitter:.3g} to the diagonal",
              file=sys.stderr)
    names = labels if labels is not None else header
    if names is not None:
        names = list(GroundSet(system.n, tuple(names)).labels)
    desc = {"file": str(path), "kind": kind, "shape": list(data.shape)}
    return system, names, desc


def _emit(report: RunReport, out) -> None:
    if out is None:
        print(report.to_json())
    else:
        report.write(out)
        print(f"wrote {out}: loss {report.loss:.6g} bits, blocks {report.blocks}", file=sys.stderr)


def _one_based(masks_or_subsets) -> list[list[int]]:
    return [[i + 1 for i in s] for s in masks_or_subsets]


def cmd_bipartition(args) -> int:
    system, names, desc = load_system(args.input, args.input_kind, args.labels)
    oracle = GaussianMIOracle(system, fast=not args.naive)
    if args.exhaustive:
        res = exhaustive_bipartition(oracle, system.n, allow_large=args.allow_large)
        method = "exhaustive"
    else:
        res = minimize_bipartition(oracle, system.n)
        method = "queyranne"
    blocks = sorted(res.blocks, key=lambda s: s.indices)
    _emit(RunReport(input=desc, method=method, blocks=_one_based(blocks), loss=res.loss,
                    oracle_calls=res.oracle_calls, wall_time=res.wall_time,
                    jitter=system.jitter, version=__version__, seed=args.seed,
                    labels=names), args.out)
    return EXIT_OK


def cmd_kpartition(args) -> int:
    system, names, desc = load_system(args.input, args.input_kind, args.labels)
    if args.hierarchical:
        t0 = time.perf_counter()
        tree = hierarchical_bipartition(system, max_depth=args.max_depth)
        wall = time.perf_counter() - t0
        leaves = sorted(tree.leaves(), key=lambda s: s.indices)
        report = RunReport(input=desc, method="hierarchical", blocks=_one_based(leaves),
                           loss=total_correlation_loss(system, leaves), oracle_calls=0,
                           wall_time=wall, jitter=system.jitter, version=__version__,
                           seed=args.seed, optimal=False, labels=names,
                           extra={"cut_losses": tree.cuts()})
    else:
        if args.k is None:
            raise InputError("--k is required unless --hierarchical is given")
        if not 2 <= args.k <= system.n:
            raise InputError(f"k must satisfy 2 <= k <= n={system.n}, got {args.k}")
        if args.exhaustive:
            res = exhaustive_kpartition(system, args.k, allow_large=args.allow_large)
            method = "exhaustive"
        else:
            res = minimize_kpartition(system, args.k)
            method = "nested"
        report = RunReport(input=desc, method=method, blocks=_one_based(res.blocks),
                           loss=res.loss, oracle_calls=res.oracle_calls,
                           wall_time=res.wall_time, jitter=system.jitter,
                           version=__version__, seed=args.seed, labels=names,
                           extra={"k": args.k})
    _emit(report, args.out)
    return EXIT_OK


def _sizes(args) -> list[int]:
    if args.sizes:
        return sorted(set(args.sizes))
    if args.min_n < 2 or args.max_n < args.min_n:
        raise InputError("need 2 <= --min-n <= --max-n")
    if args.progression == "linear":
        return list(range(args.min_n, args.max_n + 1, args.step))
    out, n = [], args.min_n
    while n <= args.max_n:
        out.append(n)
        n *= 2
    return out


def cmd_bench(args) -> int:
    from .studies import bench, fit_report, worker_count

    rows = bench(_sizes(args), args.algos, reps=args.reps, seed=args.seed,
                 samples=args.samples, workers=worker_count(args.workers))
    write_rows_csv(args.out, [r.__dict__ for r in rows])
    for algo, fit in fit_report(rows).items():
        print(f"{algo}: {fit['model']} slope {fit['slope']:.3f}, intercept "
              f"{fit['intercept']:.3f} over {fit['points']} sizes", file=sys.stderr)
    if args.plot:
        from .plotting import figure_path, plot_bench

        print(f"wrote {plot_bench(rows, figure_path(args.out, args.plot_format))}", file=sys.stderr)
    return EXIT_OK


def cmd_cml_sweep(args) -> int:
    from .studies import cml_sweep, worker_count

    base = _cml_params(args, delta=0.5)
    rows, runs = cml_sweep(args.deltas, args.runs, base, max_attempts=args.max_attempts,
                           workers=worker_count(args.workers))
    write_rows_csv(args.out, [r.to_dict() for r in rows])
    if args.detail:
        write_rows_csv(args.detail, [
            {"delta": s.delta, "run": s.run, "attempts": s.attempts,
             "side": " ".join(str(i + 1) for i in s.side), "loss": s.loss, "hit": int(s.hit)}
            for s in runs])
    for r in rows:
        print(f"delta={r.delta:g}: p_hat={r.p_hat:.3f} ({r.runs} runs, {r.diverged} diverged draws)",
              file=sys.stderr)
    if args.plot:
        from .plotting import figure_path, plot_sweep

        print(f"wrote {plot_sweep(rows, figure_path(args.out, args.plot_format))}", file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    system, _, desc = load_system(args.input, args.input_kind, None)
    oracle = GaussianMIOracle(system) if args.loss == "mi" else entropy_oracle(system)
    check = check_submodular if args.property == "submodular" else check_symmetric
    rep = check(oracle, GroundSet(system.n), trials=args.trials, tol=args.tol, seed=args.seed)
    out = dict(rep.to_dict(), loss=args.loss, input=desc)
    text = json.dumps(out, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(f"{args.property} ({args.loss}): {'ok' if rep.ok else 'VIOLATED'}, "
          f"{len(rep.violations)}/{rep.trials} trials, max violation {rep.max_violation:.3g}")
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def _cml_params(args, delta: float) -> CmlParams:
    return CmlParams(n=args.n, a=args.a, eps=args.eps, delta=delta, t_total=args.t_total,
                     t_transient=args.t_transient, seed=args.seed,
                     weak_link_site=args.weak_link_site - 1)


def cmd_gen(args) -> int:
    if args.source == "blocks":
        data = gen_block_correlated(args.block_size, args.n_blocks, args.samples, args.lam, args.seed)
    elif args.source == "gaussian":
        data = gen_random_gaussian(args.n, args.samples, args.seed)
    else:
        data = simulate_cml(_cml_params(args, args.delta))
    header = None if args.no_header else [f"x{i + 1}" for i in range(data.shape[1])]
    write_matrix_csv(args.out, data, header)
    print(f"wrote {args.out}: {data.shape[0]} x {data.shape[1]}", file=sys.stderr)
    return EXIT_OK


def _add_input(p) -> None:
    p.add_argument("--input", required=True, help="CSV file: samples (rows) x variables, or a covariance")
    p.add_argument("--input-kind", choices=("samples", "covariance"), default="samples")


def _add_cml(p, sweep: bool = False) -> None:
    d = CmlParams()
    p.add_argument("--n", type=int, default=d.n, help="number of sites")
    p.add_argument("--a", type=float, default=d.a, help="logistic parameter")
    p.add_argument("--eps", type=float, default=d.eps, help="lateral coupling")
    if not sweep:
        p.add_argument("--delta", type=float, default=d.delta, help="connection parameter in [0, 1/2]")
    p.add_argument("--t-total", type=int, default=d.t_total, help="retained steps")
    p.add_argument("--t-transient", type=int, default=d.t_transient, help="discarded steps")
    p.add_argument("--weak-link-site", type=int, default=d.weak_link_site + 1,
                   help="1-based site j; the weak link joins sites j and j+1 (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mip", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bipartition", help="minimum mutual-information bipartition")
    _add_input(p)
    p.add_argument("--labels", type=_str_list, help="comma-separated variable names")
    p.add_argument("--out", help="JSON report path (default: stdout)")
    p.add_argument("--exhaustive", action="store_true", help="enumerate every bipartition instead")
    p.add_argument("--allow-large", action="store_true", help="lift the enumeration size cap")
    p.add_argument("--naive", action="store_true", help="refactorize every subset (slow reference path)")
    p.add_argument("--seed", type=int, default=0, help="recorded in the report")
    p.set_defaults(func=cmd_bipartition)

    p = sub.add_parser("kpartition", help="minimum total-correlation k-partition")
    _add_input(p)
    p.add_argument("--k", type=int, help="number of blocks")
    p.add_argument("--labels", type=_str_list, help="comma-separated variable names")
    p.add_argument("--out", help="JSON report path (default: stdout)")
    p.add_argument("--exhaustive", action="store_true", help="enumerate every k-partition instead")
    p.add_argument("--allow-large", action="store_true", help="lift the enumeration size cap")
    p.add_argument("--hierarchical", action="store_true",
                   help="greedy tree of bipartitions (not guaranteed optimal)")
    p.add_argument("--max-depth", type=int, help="depth limit for --hierarchical")
    p.add_argument("--seed", type=int, default=0, help="recorded in the report")
    p.set_defaults(func=cmd_kpartition)

    p = sub.add_parser("bench", help="timing sweep on random Gaussian systems")
    p.add_argument("--min-n", type=int, default=50)
    p.add_argument("--max-n", type=int, default=400)
    p.add_argument("--progression", choices=("double", "linear"), default="double")
    p.add_argument("--step", type=int, default=1, help="increment for --progression linear")
    p.add_argument("--sizes", type=_int_list, help="explicit comma-separated sizes")
    p.add_argument("--algos", type=_str_list, default=["queyranne"],
                   help="comma-separated subset of queyranne,exhaustive")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--samples", type=int, default=10_000, help="samples per generated system")
    p.add_argument("--workers", type=int, help="worker processes (capped by MIP_THREADS)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--plot", action="store_true", help="also render a figure next to the CSV")
    p.add_argument("--plot-format", default=".png", help="figure suffix, e.g. .png or .pdf")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("cml-sweep", help="weak-link detection rate across connection parameters")
    p.add_argument("--deltas", type=_float_list, default=[0, 0.125, 0.25, 0.375, 0.5])
    p.add_argument("--runs", type=int, default=50)
    _add_cml(p, sweep=True)
    p.add_argument("--max-attempts", type=int, default=50,
                   help="draws per run before a diverging run is an error")
    p.add_argument("--workers", type=int, help="worker processes (capped by MIP_THREADS)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path for per-delta rates")
    p.add_argument("--detail", help="optional CSV path for per-run results")
    p.add_argument("--plot", action="store_true", help="also render a figure next to the CSV")
    p.add_argument("--plot-format", default=".png", help="figure suffix, e.g. .png or .pdf")
    p.set_defaults(func=cmd_cml_sweep)

    p = sub.add_parser("check", help="randomized submodularity or symmetry check")
    _add_input(p)
    p.add_argument("--property", choices=("submodular", "symmetric"), required=True)
    p.add_argument("--loss", choices=("mi", "entropy"), default="mi")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="optional JSON path for the full report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="write synthetic data as CSV")
    gsub = p.add_subparsers(dest="source", required=True)
    g = gsub.add_parser("blocks", help="block-correlated samples")
    g.add_argument("--block-size", type=int, default=20)
    g.add_argument("--n-blocks", type=int, default=2)
    g.add_argument("--samples", type=int, default=1000)
    g.add_argument("--lam", type=float, default=0.1)
    g = gsub.add_parser("gaussian", help="iid standard normal samples")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--samples", type=int, default=10_000)
    g = gsub.add_parser("cml", help="coupled logistic-map trajectory")
    _add_cml(g)
    for g in gsub.choices.values():
        g.add_argument("--seed", type=int, default=0)
        g.add_argument("--out", required=True, help="CSV path")
        g.add_argument("--no-header", action="store_true", help="omit the x1..xn header row")
        g.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"mip: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MipError, ValueError, OSError) as exc:
        print(f"mip: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
