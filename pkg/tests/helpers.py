"""Shared builders and independent reference implementations for the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np

from mipsearch.loss import GaussianSystem


def random_spd(n: int, rng: np.random.Generator, ridge: float = 0.1) -> np.ndarray:
    """Random covariance with generic (tie-free) correlations."""
    a = rng.standard_normal((n, n))
    return a @ a.T + ridge * n * np.eye(n)


def random_system(n: int, seed: int) -> GaussianSystem:
    return GaussianSystem(random_spd(n, np.random.default_rng(seed)))


def block_diag_cov(sizes, rng: np.random.Generator) -> np.ndarray:
    n = sum(sizes)
    out = np.zeros((n, n))
    at = 0
    for s in sizes:
        out[at:at + s, at:at + s] = random_spd(s, rng)
        at += s
    return out


def cofactor_det(m) -> float:
    """Determinant by Laplace expansion along the first row (n <= 6 only)."""
    m = [list(map(float, r)) for r in m]
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0.0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * cofactor_det(minor)
    return total


def closed_form_mi(sigma: np.ndarray, side) -> float:
    """log2|S_M| + log2|S_Mc| - log2|S| with plain numpy determinants."""
    n = sigma.shape[0]
    a = sorted(side)
    b = [i for i in range(n) if i not in side]
    det = np.linalg.det
    return float(np.log2(det(sigma[np.ix_(a, a)])) + np.log2(det(sigma[np.ix_(b, b)]))
                 - np.log2(det(sigma)))


def double_loop_mi(p: np.ndarray, side) -> float:
    """Discrete MI between variable groups by explicit summation over cells."""
    n = p.ndim
    a = sorted(side)
    b = [i for i in range(n) if i not in side]
    pa: dict = {}
    pb: dict = {}
    for cell in itertools.product(*(range(s) for s in p.shape)):
        v = p[cell]
        ka = tuple(cell[i] for i in a)
        kb = tuple(cell[i] for i in b)
        pa[ka] = pa.get(ka, 0.0) + v
        pb[kb] = pb.get(kb, 0.0) + v
    total = 0.0
    for cell in itertools.product(*(range(s) for s in p.shape)):
        v = p[cell]
        if v > 0:
            ka = tuple(cell[i] for i in a)
            kb = tuple(cell[i] for i in b)
            total += v * math.log2(v / (pa[ka] * pb[kb]))
    return total


def stirling2(n: int, k: int) -> int:
    """Stirling numbers of the second kind by the standard recurrence."""
    table = [[0] * (k + 1) for _ in range(n + 1)]
    table[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, k + 1):
            table[i][j] = j * table[i - 1][j] + table[i - 1][j - 1]
    return table[n][k]


def all_bipartition_sides(n: int):
    """Every nonempty proper subset containing element 0's complement side once."""
    for r in range(1, n):
        for side in itertools.combinations(range(1, n), r):
            yield side
