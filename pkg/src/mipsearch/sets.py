"""Ground sets, subsets, set-function oracles and contraction bookkeeping.

Subsets are stored as Python integers used as bit-vectors: bit ``i`` is set
when element ``i`` belongs to the subset.  The integer doubles as the
canonical memoization key, so equal sets always hash and compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError


def mask_of(indices: Iterable[int]) -> int:
    """Bit mask with the given element indices set."""
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


def indices_of(mask: int) -> tuple[int, ...]:
    """Sorted element indices present in ``mask``."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def full_mask(n: int) -> int:
    return (1 << n) - 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def lowest_index(mask: int) -> int:
    """Smallest element of a nonempty mask."""
    return (mask & -mask).bit_length() - 1


def lex_key(mask: int) -> tuple[int, ...]:
    """Sort key realizing lexicographic order on sorted index tuples."""
    return indices_of(mask)


@dataclass(frozen=True)
class GroundSet:
    """The full set of ``n`` variables, optionally with display labels."""

    n: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"ground set needs n >= 1, got {self.n}")
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.n:
                raise DomainError(f"expected {self.n} labels, got {len(labels)}")
            if len(set(labels)) != self.n:
                raise DomainError("labels must be distinct")
            object.__setattr__(self, "labels", labels)

    @property
    def full(self) -> Subset:
        return Subset(full_mask(self.n), self.n)

    def subset(self, indices: Iterable[int]) -> Subset:
        return Subset.from_indices(indices, self.n)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i + 1)


@dataclass(frozen=True, order=False)
class Subset:
    """A subset of ``{0, ..., n-1}`` backed by an integer bit mask."""

    mask: int
    n: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.n:
            raise DomainError(f"mask {self.mask:#x} has indices outside range({self.n})")

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int) -> Subset:
        idx = [int(i) for i in indices]
        if any(i < 0 or i >= n for i in idx):
            raise DomainError(f"indices {idx} outside range({n})")
        return cls(mask_of(idx), n)

    @property
    def indices(self) -> tuple[int, ...]:
        return indices_of(self.mask)

    def complement(self) -> Subset:
        return Subset(full_mask(self.n) ^ self.mask, self.n)

    def __or__(self, other: Subset) -> Subset:
        self._check(other)
        return Subset(self.mask | other.mask, self.n)

    def __and__(self, other: Subset) -> Subset:
        self._check(other)
        return Subset(self.mask & other.mask, self.n)

    def __sub__(self, other: Subset) -> Subset:
        self._check(other)
        return Subset(self.mask & ~other.mask, self.n)

    def __len__(self) -> int:
        return popcount(self.mask)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.n and bool(self.mask >> i & 1)

    def __bool__(self) -> bool:
        return self.mask != 0

    def __lt__(self, other: Subset) -> bool:
        return self.indices < other.indices

    def __repr__(self) -> str:
        return f"Subset({set(self.indices) or '{}'}, n={self.n})"

    def _check(self, other: Subset) -> None:
        if self.n != other.n:
            raise DomainError(f"subsets over different ground sets ({self.n} vs {other.n})")


def complement(s: Subset) -> Subset:
    """Indices of the ground set that are not in ``s``."""
    return s.complement()


def _as_mask(s: Subset | int | Iterable[int]) -> int:
    if isinstance(s, Subset):
        return s.mask
    if isinstance(s, (int, np.integer)):
        return int(s)
    return mask_of(s)


class LossOracle:
    """Memoizing, call-counting wrapper around a set function.

    ``fn`` maps a bit mask over original element indices to a real value.
    Only cache misses increment ``call_count``; with ``memoize=False`` every
    evaluation is a miss.
    """

    def __init__(self, fn: Callable[[int], float], n: int, memoize: bool = True):
        self.fn = fn
        self.n = n
        self.memoize = memoize
        self.memo: dict[int, float] = {}
        self.call_count = 0

    def __call__(self, mask: int) -> float:
        if self.memoize:
            hit = self.memo.get(mask)
            if hit is not None:
                return hit
        self.call_count += 1
        value = float(self.fn(mask))
        if self.memoize:
            self.memo[mask] = value
        return value

    def evaluate(self, s: Subset | int | Iterable[int]) -> float:
        return self(_as_mask(s))

    def chain(self, blocks: Sequence[int]) -> GreedyChain:
        """Scratch object used by pendent-pair construction over ``blocks``."""
        return GreedyChain(self, blocks)

    def pendent_order(self, blocks, singles, start, tie_tol):
        """Specialized oracles may return a full greedy ordering; None means no."""
        return None

    def reset_counts(self) -> None:
        self.call_count = 0


class GreedyChain:
    """Evaluates ``f(W | B)`` for candidate blocks while ``W`` grows.

    This generic version calls the oracle once per candidate.  Oracles with
    cheaper incremental updates override :meth:`LossOracle.chain` or
    :meth:`LossOracle.pendent_order`.
    """

    def __init__(self, oracle: LossOracle, blocks: Sequence[int]):
        self.oracle = oracle
        self.blocks = list(blocks)
        self.w_mask = 0

    def add(self, i: int) -> None:
        self.w_mask |= self.blocks[i]

    def values(self, candidates: Sequence[int]) -> np.ndarray:
        w = self.w_mask
        return np.array([self.oracle(w | self.blocks[c]) for c in candidates], dtype=float)


def cardinality_oracle(n: int) -> LossOracle:
    """``f(S) = |S|``, the textbook modular function."""
    return LossOracle(popcount, n)


def constant_oracle(n: int, c: float = 0.0) -> LossOracle:
    return LossOracle(lambda _m: c, n)


@dataclass(frozen=True)
class MergeState:
    """Effective elements of a contracted ground set.

    ``blocks`` holds one bit mask of original indices per effective element,
    ordered by smallest original index.  ``history`` lists the pairs of
    blocks fused so far, oldest first.
    """

    n: int
    blocks: tuple[int, ...]
    history: tuple[tuple[int, int], ...] = field(default=())

    @classmethod
    def singletons(cls, n: int) -> MergeState:
        return cls(n, tuple(1 << i for i in range(n)))

    @classmethod
    def over(cls, ground_mask: int, n: int) -> MergeState:
        """Singleton effective elements for the members of ``ground_mask``."""
        return cls(n, tuple(1 << i for i in indices_of(ground_mask)))

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def ground_mask(self) -> int:
        m = 0
        for b in self.blocks:
            m |= b
        return m

    def flatten(self, i: int) -> Subset:
        return Subset(self.blocks[i], self.n)

    def merge(self, t: int, u: int) -> MergeState:
        k = len(self.blocks)
        if t == u or not (0 <= t < k and 0 <= u < k):
            raise DomainError(f"invalid merge indices ({t}, {u}) for {k} effective elements")
        lo, hi = min(t, u), max(t, u)
        fused = self.blocks[lo] | self.blocks[hi]
        blocks = self.blocks[:lo] + (fused,) + self.blocks[lo + 1 : hi] + self.blocks[hi + 1 :]
        return MergeState(self.n, blocks, self.history + ((self.blocks[t], self.blocks[u]),))


def merge(state: MergeState, t: int, u: int) -> MergeState:
    """Fuse effective elements ``t`` and ``u`` into a single element."""
    return state.merge(t, u)


@dataclass
class PropertyReport:
    """Outcome of a randomized property check.

    ``violations`` holds ``(sets, margin)`` records for failing trials.  For
    submodularity ``max_violation`` is the most negative margin seen (0 when
    none is negative); for symmetry it is the largest absolute gap.
    """

    property: str
    trials: int
    tol: float
    violations: list = field(default_factory=list)
    max_violation: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "trials": self.trials,
            "tol": self.tol,
            "ok": self.ok,
            "n_violations": len(self.violations),
            "max_violation": self.max_violation,
            "violations": [
                {"sets": [list(indices_of(m)) for m in sets], "margin": margin}
                for sets, margin in self.violations[:20]
            ],
        }


def _random_mask(rng: np.random.Generator, n: int) -> int:
    bits = rng.integers(0, 2, size=n)
    return mask_of(np.flatnonzero(bits))


def check_submodular(oracle: LossOracle, g: GroundSet, trials: int = 1000,
                     tol: float = 1e-9, seed: int | None = 0) -> PropertyReport:
    """Random test of ``f(X) + f(Y) >= f(X | Y) + f(X & Y)``."""
    if trials < 1 or tol < 0:
        raise DomainError("need trials >= 1 and tol >= 0")
    rng = np.random.default_rng(seed)
    report = PropertyReport("submodular", trials, tol)
    worst = 0.0
    for _ in range(trials):
        x, y = _random_mask(rng, g.n), _random_mask(rng, g.n)
        margin = oracle(x) + oracle(y) - oracle(x | y) - oracle(x & y)
        worst = min(worst, margin)
        if margin < -tol:
            report.violations.append(((x, y), margin))
    report.max_violation = worst
    return report


def check_symmetric(oracle: LossOracle, g: GroundSet, trials: int = 1000,
                    tol: float = 1e-9, seed: int | None = 0) -> PropertyReport:
    """Random test of ``f(S) == f(V \\ S)``."""
    if trials < 1 or tol < 0:
        raise DomainError("need trials >= 1 and tol >= 0")
    rng = np.random.default_rng(seed)
    full = full_mask(g.n)
    report = PropertyReport("symmetric", trials, tol)
    worst = 0.0
    for _ in range(trials):
        s = _random_mask(rng, g.n)
        gap = abs(oracle(s) - oracle(full ^ s))
        worst = max(worst, gap)
        if gap > tol:
            report.violations.append(((s,), gap))
    report.max_violation = worst
    return report
