"""Exact minimization of symmetric submodular functions by pendent pairs.

Each phase builds a greedy ordering of the current effective elements, keeps
the last element ``u`` as a candidate cut, and contracts the last two
elements into one.  After ``n - 1`` phases the best candidate is the global
minimizer.  The work is ``O(n^3)`` oracle evaluations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .sets import GroundSet, LossOracle, MergeState, Subset, indices_of, popcount

#: Values closer than this (relative to magnitude) are treated as ties.
TIE_TOL = 1e-10


@dataclass(frozen=True)
class PendentPair:
    t: int
    u: int
    ordering: tuple[int, ...]


@dataclass
class BipartitionResult:
    """Best bipartition found, reported by its smaller side."""

    subset: Subset
    loss: float
    candidates: list[tuple[Subset, float]] = field(default_factory=list)
    oracle_calls: int = 0
    wall_time: float = 0.0

    @property
    def blocks(self) -> list[Subset]:
        return [self.subset, self.subset.complement()]


def _first_min(values: np.ndarray) -> int:
    """Position of the first value within tie tolerance of the minimum."""
    j = int(np.argmin(values))
    best = values[j]
    if not np.isfinite(best):
        v = np.where(np.isnan(values), np.inf, values)
        j = int(np.argmin(v))
        best = v[j]
        if not np.isfinite(best):
            return j
    # argmin already returns the first exact minimum; widen to near-ties
    return int(np.argmax(values <= best + TIE_TOL * max(1.0, abs(best))))


def pendent_pair(oracle: LossOracle, state: MergeState, start: int = 0) -> PendentPair:
    """Greedy ordering ``v1..vm`` seeded at ``start``; returns ``(v_{m-1}, v_m)``.

    Step ``i`` appends the element minimizing ``f(W | u) - f(u)`` where ``W``
    holds the elements chosen so far.  Ties go to the element with the
    smallest original index.
    """
    m = len(state)
    if m < 2:
        raise DomainError("a pendent pair needs at least two effective elements")
    if not 0 <= start < m:
        raise DomainError(f"start {start} outside range({m})")
    singles = np.array([oracle(b) for b in state.blocks])
    order = oracle.pendent_order(state.blocks, singles, start, TIE_TOL)
    if order is not None:
        return PendentPair(order[-2], order[-1], tuple(order))
    chain = oracle.chain(state.blocks)
    chain.add(start)
    order = [start]
    remaining = np.delete(np.arange(m), start)
    while len(remaining) > 1:
        keys = chain.values(remaining) - singles[remaining]
        j = _first_min(keys)
        pick = int(remaining[j])
        remaining = np.delete(remaining, j)
        order.append(pick)
        if len(remaining) > 1:
            chain.add(pick)
    order.append(int(remaining[0]))
    return PendentPair(order[-2], order[-1], tuple(order))


def _normalize(mask: int, ground: int) -> int:
    """Smaller side of the cut ``(mask, ground \\ mask)``; lexicographic on ties."""
    other = ground ^ mask
    a, b = popcount(mask), popcount(other)
    if a != b:
        return mask if a < b else other
    return min(mask, other, key=indices_of)


def search(oracle: LossOracle, state: MergeState) -> tuple[int, float, list[tuple[int, float]]]:
    """Run all contraction phases over ``state``.

    Returns ``(best_mask, best_loss, candidates)`` with masks over original
    indices; ``best_mask`` is normalized to the smaller side of the cut.
    """
    if len(state) < 2:
        raise DomainError("need at least two elements to bipartition")
    ground = state.ground_mask
    candidates = []
    while len(state) >= 2:
        pp = pendent_pair(oracle, state, 0)
        u_mask = state.blocks[pp.u]
        candidates.append((u_mask, oracle(u_mask)))
        state = state.merge(pp.t, pp.u)
    losses = np.array([v for _, v in candidates])
    v = np.where(np.isnan(losses), np.inf, losses)
    best = v.min()
    near = np.flatnonzero(v <= best + TIE_TOL * max(1.0, abs(best))) if np.isfinite(best) else [int(np.argmin(v))]
    best_mask = min((_normalize(candidates[i][0], ground) for i in near), key=indices_of)
    return best_mask, oracle(best_mask), candidates


def minimize_bipartition(oracle: LossOracle, g: GroundSet | int) -> BipartitionResult:
    """Minimum of a symmetric submodular ``oracle`` over all bipartitions.

    Raises
    ------
    DomainError
        If the ground set has fewer than two elements.
    """
    n = g.n if isinstance(g, GroundSet) else int(g)
    if n < 2:
        raise DomainError("a ground set of one element has no bipartition")
    calls0 = oracle.call_count
    t0 = time.perf_counter()
    best, loss, cands = search(oracle, MergeState.singletons(n))
    wall = time.perf_counter() - t0
    return BipartitionResult(
        subset=Subset(best, n),
        loss=loss,
        candidates=[(Subset(m, n), v) for m, v in cands],
        oracle_calls=oracle.call_count - calls0,
        wall_time=wall,
    )
