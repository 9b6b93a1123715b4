"""Synthetic data sources: iid Gaussian noise, block-correlated samples and a
chain of coupled logistic maps with one adjustable link.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError

DIVERGENCE_BOUND = 1e10


def gen_random_gaussian(n: int, samples: int = 10_000, seed: int | None = 0) -> np.ndarray:
    """``samples x n`` matrix of iid standard normal draws."""
    if n < 2 or samples < 2:
        raise DomainError("need n >= 2 and samples >= 2")
    return np.random.default_rng(seed).standard_normal((samples, n))


def gen_block_correlated(block_size: int = 20, n_blocks: int = 2, samples: int = 1000,
                         lam: float = 0.1, seed: int | None = 0) -> np.ndarray:
    """Blocks of variables correlated within and (nearly) independent across.

    For each block, draw ``X`` (samples x block_size) iid normal, take its
    thin SVD ``X = U S V'`` and emit ``U S (lam * ones + (1 - lam) * E)``
    with ``E`` an iid normal square matrix.  Blocks are concatenated
    column-wise.
    """
    if block_size < 2 or n_blocks < 1 or samples < 2:
        raise DomainError("need block_size >= 2, n_blocks >= 1 and samples >= 2")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_blocks):
        x = rng.standard_normal((samples, block_size))
        u, s, _vt = np.linalg.svd(x, full_matrices=False)
        e = rng.standard_normal((block_size, block_size))
        mix = lam * np.ones((block_size, block_size)) + (1.0 - lam) * e
        out.append((u * s) @ mix)
    return np.hstack(out)


@dataclass(frozen=True)
class CmlParams:
    """Coupled logistic-map chain with a weakened link between sites
    ``weak_link_site`` and ``weak_link_site + 1`` (zero-based).

    ``delta = 1/2`` reproduces the homogeneous chain; ``delta = 0`` cuts it
    into two independent chains.
    """

    n: int = 30
    a: float = 1.8950
    eps: float = 0.1
    delta: float = 0.5
    t_total: int = 20_000
    t_transient: int = 1000
    seed: int | None = 0
    weak_link_site: int = 19

    def __post_init__(self):
        if not 0.0 <= self.delta <= 0.5:
            raise DomainError(f"delta must lie in [0, 1/2], got {self.delta}")
        if not 0.0 <= self.eps <= 1.0:
            raise DomainError(f"eps must lie in [0, 1], got {self.eps}")
        # the modified stencil touches sites j-1..j+2, each needing two neighbours
        if not 2 <= self.weak_link_site <= self.n - 4:
            raise DomainError(
                f"weak_link_site must lie in [2, n-4] = [2, {self.n - 4}], got {self.weak_link_site}")
        if self.t_total < 1 or self.t_transient < 0:
            raise DomainError("need t_total >= 1 and t_transient >= 0")


def cml_coefficients(n: int, eps: float, delta: float | None = None,
                     weak_link_site: int = 19) -> np.ndarray:
    """``n x 3`` stencil weights ``(left, self, right)`` applied to ``f_a``.

    With ``delta=None`` the unmodified chain is returned.  Boundary sites give
    full weight ``eps`` to their single neighbour.  The four sites around the
    weak link use the weights exactly as written for that model; their rows
    need not sum to one when ``delta != 1/2``.
    """
    w = np.zeros((n, 3))
    w[:, 1] = 1.0 - eps
    w[1:-1, 0] = eps / 2
    w[1:-1, 2] = eps / 2
    w[0, 2] = eps
    w[-1, 0] = eps
    if delta is not None:
        j = weak_link_site
        w[j - 1, 2] = (1.0 - delta) * eps
        w[j, 2] = delta * eps
        w[j + 1, 0] = delta * eps
        w[j + 2, 0] = (1.0 - delta) * eps
    return w


def logistic(x: np.ndarray, a: float) -> np.ndarray:
    return 1.0 - a * x * x


def cml_step(x: np.ndarray, w: np.ndarray, a: float) -> np.ndarray:
    """One update of the chain; ``x`` may carry leading batch axes."""
    fx = logistic(x, a)
    left = np.zeros_like(fx)
    right = np.zeros_like(fx)
    left[..., 1:] = fx[..., :-1]
    right[..., :-1] = fx[..., 1:]
    return w[:, 1] * fx + w[:, 0] * left + w[:, 2] * right


def simulate_cml(p: CmlParams, x0=None) -> np.ndarray:
    """Trajectory of ``p.t_total`` retained steps as a ``T x n`` matrix.

    Initial states are uniform on [0, 1] unless ``x0`` is given.  States are
    not clamped: for ``a = 1.895`` the logistic map sends [-1, 1] into
    [1 - a, 1].

    Raises
    ------
    DivergenceError
        If any state exceeds ``1e10`` in magnitude.
    """
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (p.n,):
            raise DomainError(f"x0 must have shape ({p.n},), got {x0.shape}")
        x0 = x0[None, :]
    return simulate_cml_batch(p, 1, x0=x0)[0]


def simulate_cml_batch(p: CmlParams, runs: int, seeds=None, x0=None) -> np.ndarray:
    """``runs`` independent trajectories, shape ``(runs, T, n)``.

    Run ``r`` draws its initial state from ``default_rng(seeds[r])``;
    by default ``seeds = [p.seed]`` for a single run, otherwise seeds are
    spawned from ``p.seed``.  An explicit ``(runs, n)`` array ``x0``
    replaces the random draw.
    """
    if x0 is not None:
        x = np.array(x0, dtype=float)
        if x.shape != (runs, p.n):
            raise DomainError(f"x0 must have shape ({runs}, {p.n}), got {x.shape}")
    else:
        if seeds is None:
            seeds = [p.seed] if runs == 1 else np.random.SeedSequence(p.seed).spawn(runs)
        x = np.stack([np.random.default_rng(s).uniform(0.0, 1.0, p.n) for s in seeds])
    w = cml_coefficients(p.n, p.eps, p.delta, p.weak_link_site)
    out = np.empty((runs, p.t_total, p.n))
    for t in range(p.t_transient + p.t_total):
        x = cml_step(x, w, p.a)
        if not np.all(np.abs(x) <= DIVERGENCE_BOUND):
            bad = np.argwhere(~(np.abs(x) <= DIVERGENCE_BOUND))[0]
            raise DivergenceError(
                f"state diverged at step {t + 1}, run {bad[0]}, site {bad[1]} "
                f"(value {x[tuple(bad)]!r}; a={p.a}, eps={p.eps}, delta={p.delta})")
        if t >= p.t_transient:
            out[:, t - p.t_transient] = x
    return out
