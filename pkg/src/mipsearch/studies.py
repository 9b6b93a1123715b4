"""Experiment drivers behind ``mip bench`` and ``mip cml-sweep``.

Both sweeps are grids of independent cells.  Every cell derives its own seed
from the master seed and its grid coordinates, so results do not depend on
worker count or completion order, and rows come back sorted.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DivergenceError, DomainError, InputError
from .exhaustive import exhaustive_bipartition
from .datagen import CmlParams, gen_random_gaussian, simulate_cml
from .loss import GaussianMIOracle, covariance_from_samples
from .queyranne import minimize_bipartition

ALGOS = ("queyranne", "exhaustive")


def worker_count(requested: int | None = None) -> int:
    """Workers to use: ``requested`` (or the CPU count), capped by ``MIP_THREADS``."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("MIP_THREADS")
    if cap is not None:
        try:
            cap_n = int(cap)
        except ValueError:
            raise InputError(f"MIP_THREADS must be a positive integer, got {cap!r}") from None
        if cap_n < 1:
            raise InputError(f"MIP_THREADS must be a positive integer, got {cap!r}")
        n = min(n, cap_n)
    return max(1, n)


def run_cells(fn: Callable, cells: Sequence[tuple], workers: int = 1) -> list:
    """``[fn(*c) for c in cells]``, optionally spread over worker processes."""
    if workers <= 1 or len(cells) <= 1:
        return [fn(*c) for c in cells]
    with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        return list(pool.map(fn, *zip(*cells)))


def cell_seed(master: int, *coords: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=tuple(int(c) for c in coords))


# ---------------------------------------------------------------- bench


@dataclass(frozen=True)
class BenchRow:
    n: int
    algo: str
    rep: int
    wall_time: float
    oracle_calls: int
    loss: float


def warm_up() -> None:
    """Compile the numba kernels so the first timed cell does not pay for it."""
    x = gen_random_gaussian(6, samples=50, seed=0)
    minimize_bipartition(GaussianMIOracle(covariance_from_samples(x)), 6)


def bench_cell(n: int, algo: str, rep: int, seed: int, samples: int) -> BenchRow:
    warm_up()
    x = gen_random_gaussian(n, samples=max(samples, 2 * n), seed=cell_seed(seed, n, rep))
    oracle = GaussianMIOracle(covariance_from_samples(x))
    if algo == "queyranne":
        res = minimize_bipartition(oracle, n)
    elif algo == "exhaustive":
        res = exhaustive_bipartition(oracle, n, allow_large=True)
    else:
        raise DomainError(f"unknown algorithm {algo!r}; choose from {ALGOS}")
    return BenchRow(n, algo, rep, res.wall_time, res.oracle_calls, res.loss)


def bench(ns: Iterable[int], algos: Iterable[str] = ("queyranne",), reps: int = 1,
          seed: int = 0, samples: int = 10_000, workers: int = 1) -> list[BenchRow]:
    """Time each algorithm on random Gaussian systems of every size in ``ns``.

    Timings exclude data generation and covariance estimation.  Running cells
    concurrently shares the machine between them, so use ``workers=1`` when
    the absolute times matter.
    """
    algos = list(algos)
    for a in algos:
        if a not in ALGOS:
            raise DomainError(f"unknown algorithm {a!r}; choose from {ALGOS}")
    if reps < 1:
        raise DomainError("reps must be >= 1")
    cells = [(int(n), a, r, seed, samples) for a in algos for n in ns for r in range(reps)]
    for n, *_ in cells:
        if n < 2:
            raise DomainError(f"bench sizes must be >= 2, got {n}")
    rows = run_cells(bench_cell, cells, workers)
    return sorted(rows, key=lambda r: (r.algo, r.n, r.rep))


def median_times(rows: Iterable[BenchRow], algo: str) -> tuple[np.ndarray, np.ndarray]:
    by_n: dict[int, list[float]] = {}
    for r in rows:
        if r.algo == algo:
            by_n.setdefault(r.n, []).append(r.wall_time)
    ns = np.array(sorted(by_n), dtype=float)
    return ns, np.array([np.median(by_n[int(n)]) for n in ns])


def loglog_slope(ns, times) -> tuple[float, float]:
    """Least-squares fit ``log2 T = slope * log2 n + intercept``."""
    slope, icept = np.polyfit(np.log2(ns), np.log2(times), 1)
    return float(slope), float(icept)


def semilog_slope(ns, times) -> tuple[float, float]:
    """Least-squares fit ``log2 T = slope * n + intercept``."""
    slope, icept = np.polyfit(np.asarray(ns, dtype=float), np.log2(times), 1)
    return float(slope), float(icept)


def fit_report(rows: Sequence[BenchRow]) -> dict[str, dict]:
    """Scaling fits per algorithm: log-log for the search, semi-log for enumeration."""
    out = {}
    for algo in sorted({r.algo for r in rows}):
        ns, t = median_times(rows, algo)
        if len(ns) < 2 or np.any(t <= 0):
            continue
        fit = semilog_slope if algo == "exhaustive" else loglog_slope
        slope, icept = fit(ns, t)
        out[algo] = {"model": "semilog" if algo == "exhaustive" else "loglog",
                     "slope": slope, "intercept": icept, "points": len(ns)}
    return out


# ---------------------------------------------------------------- CML sweep


@dataclass(frozen=True)
class SweepRun:
    delta: float
    run: int
    attempts: int
    side: tuple[int, ...]
    loss: float
    hit: bool


@dataclass(frozen=True)
class SweepRow:
    delta: float
    p_hat: float
    runs: int
    seed: int
    diverged: int

    def to_dict(self) -> dict:
        return asdict(self)


def target_side(p: CmlParams) -> tuple[int, ...]:
    """Zero-based sites past the weak link."""
    return tuple(range(p.weak_link_site + 1, p.n))


def cml_run(base: CmlParams, delta: float, run: int, max_attempts: int) -> SweepRun:
    """Simulate one lattice and locate its minimum bipartition.

    A trajectory that diverges is discarded and redrawn from the next seed
    in this run's sequence, up to ``max_attempts`` draws.  Run ``r`` uses the
    same seed sequence at every ``delta``.
    """
    p = replace(base, delta=delta)
    for attempt in range(max_attempts):
        try:
            x = simulate_cml(replace(p, seed=cell_seed(base.seed, run, attempt)))
        except DivergenceError:
            continue
        res = minimize_bipartition(GaussianMIOracle(covariance_from_samples(x)), p.n)
        side = res.subset.indices
        return SweepRun(delta, run, attempt + 1, side, res.loss, side == target_side(p))
    raise DivergenceError(
        f"run {run} at delta={delta} diverged in all {max_attempts} draws")


def cml_sweep(deltas: Iterable[float], runs: int, base: CmlParams = CmlParams(),
              max_attempts: int = 50, workers: int = 1) -> tuple[list[SweepRow], list[SweepRun]]:
    """Fraction of runs whose smaller MIP side is exactly the sites past the weak link.

    Returns per-delta summary rows and the per-run records behind them,
    both sorted.  ``diverged`` counts discarded trajectories.
    """
    deltas = sorted(float(d) for d in deltas)
    if runs < 1 or max_attempts < 1:
        raise DomainError("need runs >= 1 and max_attempts >= 1")
    for d in deltas:
        replace(base, delta=d)  # validates the range
    cells = [(base, d, r, max_attempts) for d in deltas for r in range(runs)]
    recs = sorted(run_cells(cml_run, cells, workers), key=lambda s: (s.delta, s.run))
    rows = []
    for d in deltas:
        mine = [s for s in recs if s.delta == d]
        rows.append(SweepRow(d, sum(s.hit for s in mine) / runs, runs, int(base.seed or 0),
                             sum(s.attempts - 1 for s in mine)))
    return rows, recs
