"""Brute-force baselines: every bipartition, every k-partition.

These exist to be obviously correct.  They back the exactness tests and
provide the exponential-time reference curve for benchmarks.
"""

from __future__ import annotations

import time
from typing import Iterator

from .errors import DomainError
from .kpartition import KPartition, total_correlation_loss
from .queyranne import TIE_TOL, BipartitionResult, _normalize
from .sets import GroundSet, LossOracle, Subset, full_mask, indices_of

MAX_BIPARTITION_N = 24
MAX_KPARTITION_N = 12


def gray_bipartitions(n: int) -> Iterator[int]:
    """Masks of all ``2**(n-1) - 1`` bipartitions, one side per cut.

    Element 0 always stays on the other side, so each cut appears once.
    Successive masks differ in exactly one element (reflected Gray code).
    """
    for i in range(1, 1 << (n - 1)):
        yield (i ^ (i >> 1)) << 1


def exhaustive_bipartition(oracle: LossOracle, g: GroundSet | int,
                           allow_large: bool = False) -> BipartitionResult:
    """Global minimum of ``oracle`` over all bipartitions by enumeration.

    Ties within :data:`~mipsearch.queyranne.TIE_TOL` resolve to the
    lexicographically smallest reported side (the smaller side of the cut).
    """
    n = g.n if isinstance(g, GroundSet) else int(g)
    if n < 2:
        raise DomainError("a ground set of one element has no bipartition")
    if n > MAX_BIPARTITION_N and not allow_large:
        raise DomainError(f"n={n} exceeds the exhaustive cap of {MAX_BIPARTITION_N}")
    full = full_mask(n)
    calls0 = oracle.call_count
    t0 = time.perf_counter()
    values = [(m, oracle(m)) for m in gray_bipartitions(n)]
    wall = time.perf_counter() - t0
    best = min(v for _, v in values)
    bound = best + TIE_TOL * max(1.0, abs(best))
    best_mask, loss = min(((_normalize(m, full), v) for m, v in values if v <= bound),
                          key=lambda mv: indices_of(mv[0]))
    return BipartitionResult(
        subset=Subset(best_mask, n),
        loss=loss,
        candidates=[],
        oracle_calls=oracle.call_count - calls0,
        wall_time=wall,
    )


def restricted_growth_strings(n: int, k: int) -> Iterator[list[int]]:
    """All set partitions of ``range(n)`` into exactly ``k`` blocks.

    Each partition is a restricted growth string ``a`` with ``a[0] = 0`` and
    ``a[i] <= 1 + max(a[:i])``, using every label ``0..k-1``.
    """
    if not 1 <= k <= n:
        return
    a = [0] * n

    def rec(i: int, used: int):
        if n - i < k - used:
            return
        if i == n:
            yield list(a)
            return
        for label in range(min(used + 1, k)):
            a[i] = label
            yield from rec(i + 1, max(used, label + 1))

    a[0] = 0
    yield from rec(1, 1)


def exhaustive_kpartition(sys, k: int, allow_large: bool = False) -> KPartition:
    """Minimum total correlation over all k-partitions by enumeration.

    ``sys`` is any system exposing ``n`` and ``entropy(mask)``.
    """
    n = sys.n
    if not 2 <= k <= n:
        raise DomainError(f"k must satisfy 2 <= k <= n={n}, got {k}")
    if n > MAX_KPARTITION_N and not allow_large:
        raise DomainError(f"n={n} exceeds the exhaustive cap of {MAX_KPARTITION_N}")
    entropy = LossOracle(sys.entropy, n)
    h_full = entropy(full_mask(n))
    best = None
    count = 0
    t0 = time.perf_counter()
    for rgs in restricted_growth_strings(n, k):
        count += 1
        masks = [0] * k
        for i, label in enumerate(rgs):
            masks[label] |= 1 << i
        loss = sum(entropy(m) for m in masks) - h_full
        key = [indices_of(m) for m in masks]
        if best is None or loss < best[0] - TIE_TOL * max(1.0, abs(best[0])):
            best = (loss, masks, key)
        elif loss <= best[0] + TIE_TOL * max(1.0, abs(best[0])) and key < best[2]:
            best = (loss, masks, key)
    wall = time.perf_counter() - t0
    blocks = [Subset(m, n) for m in best[1]]
    return KPartition(blocks=blocks, loss=total_correlation_loss(sys, blocks), k=k,
                      oracle_calls=entropy.call_count, candidates=count, wall_time=wall)
