"""Information-loss functions: Gaussian log-determinant forms and discrete tables.

All values are in bits.  The Gaussian mutual information follows the closed
form ``log2|S_M| + log2|S_Mc| - log2|S|`` without the conventional factor of
one half, so reported losses are twice the textbook mutual information.
Gaussian entropies drop the ``(|M|/2) log2(2 pi e)`` constant; it cancels in
every partition loss because block sizes always sum to ``n``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from . import _kernels
from .errors import DomainError, InputError, NumericalError
from .sets import LossOracle, Subset, full_mask, indices_of, popcount

#: Relative jitter steps tried in order when a Cholesky factorization fails.
JITTER_STEPS = (1e-12, 1e-10, 1e-8)

_LN2 = math.log(2.0)
_MAX_DISCRETE_CELLS = 1 << 20


def _check_symmetric(m: np.ndarray, rtol: float = 1e-12) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    if float(np.max(np.abs(m - m.T), initial=0.0)) > rtol * scale:
        raise InputError("matrix is not symmetric")


def _chol_log2det(m: np.ndarray) -> float:
    """log2 det via Cholesky; raises ``np.linalg.LinAlgError`` if not PD."""
    c = np.linalg.cholesky(m)
    d = np.diag(c)
    # numpy accepts exact zero pivots; treat them as failures too
    if not np.all(d > 0) or not np.all(np.isfinite(d)):
        raise np.linalg.LinAlgError("zero pivot")
    return 2.0 * float(np.sum(np.log2(d)))


def logdet_psd(m, jitter_steps: Sequence[float] = JITTER_STEPS) -> tuple[float, float]:
    """Base-2 log-determinant of a symmetric PSD matrix.

    Returns ``(logdet, jitter)``.  ``jitter`` is 0 when the plain Cholesky
    factorization succeeds; otherwise ``eps * trace(m) / n`` is added to the
    diagonal for the first ``eps`` in ``jitter_steps`` that works.

    Raises
    ------
    InputError
        If ``m`` is not square and symmetric.
    NumericalError
        If the matrix stays singular after the largest jitter step.
    """
    m = np.asarray(m, dtype=float)
    _check_symmetric(m)
    try:
        return _chol_log2det(m), 0.0
    except np.linalg.LinAlgError:
        pass
    scale = float(np.trace(m)) / m.shape[0]
    eye = np.eye(m.shape[0])
    for eps in jitter_steps:
        jitter = eps * scale
        if jitter <= 0:
            break
        try:
            return _chol_log2det(m + jitter * eye), jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        f"matrix still singular after jitter {jitter_steps[-1]:g} * trace/n")


class GaussianSystem:
    """A covariance matrix plus per-subset log-determinant machinery.

    If the covariance is not positive definite, a single jitter is chosen
    for the whole matrix (see :func:`logdet_psd`) so that every principal
    submatrix used afterwards is consistent with the same regularized matrix.
    """

    def __init__(self, sigma, jitter_steps: Sequence[float] = JITTER_STEPS):
        sigma = np.array(sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] < 1:
            raise InputError(f"covariance must be a nonempty square matrix, got {sigma.shape}")
        if not np.all(np.isfinite(sigma)):
            raise InputError("covariance has non-finite entries")
        _check_symmetric(sigma)
        self.sigma = 0.5 * (sigma + sigma.T)
        self.n = self.sigma.shape[0]
        self.logdet_full, self.jitter = logdet_psd(self.sigma, jitter_steps)
        self.sigma_eff = self.sigma + self.jitter * np.eye(self.n)
        self._precision = None

    @property
    def precision(self) -> np.ndarray:
        """Inverse of the (jittered) covariance."""
        if self._precision is None:
            c = np.linalg.cholesky(self.sigma_eff)
            cinv = solve_triangular(c, np.eye(self.n), lower=True)
            p = cinv.T @ cinv
            self._precision = 0.5 * (p + p.T)
        return self._precision

    def logdet(self, mask: int) -> float:
        """log2 det of the covariance restricted to ``mask`` (fresh Cholesky)."""
        idx = list(indices_of(mask))
        try:
            return _chol_log2det(self.sigma_eff[np.ix_(idx, idx)])
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"principal submatrix {idx} is not positive definite") from exc

    def entropy(self, mask: int) -> float:
        return self.logdet(mask) if mask else 0.0

    def subsystem(self, mask: int) -> GaussianSystem:
        """Gaussian system of the variables in ``mask`` (reindexed from 0)."""
        idx = list(indices_of(mask))
        return GaussianSystem(self.sigma_eff[np.ix_(idx, idx)])

    def scaled(self, c: float) -> GaussianSystem:
        return GaussianSystem(self.sigma * c)


def covariance_from_samples(data) -> GaussianSystem:
    """Unbiased (divisor ``T - 1``) sample covariance of a ``T x n`` matrix."""
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise InputError(f"samples must be a T x n matrix, got shape {x.shape}")
    if x.shape[0] < 2:
        raise InputError(f"need at least 2 samples, got {x.shape[0]}")
    if x.shape[1] < 1:
        raise InputError("need at least one variable")
    if not np.all(np.isfinite(x)):
        raise InputError("samples contain non-finite values")
    xc = x - x.mean(axis=0)
    sigma = xc.T @ xc / (x.shape[0] - 1)
    return GaussianSystem(0.5 * (sigma + sigma.T))


def _check_proper(mask: int, n: int) -> None:
    if mask == 0 or mask == full_mask(n):
        raise DomainError("mutual information needs a nonempty proper subset")


def _mask(m) -> int:
    return m.mask if isinstance(m, Subset) else int(m)


def gaussian_mi(sys: GaussianSystem, m) -> float:
    """``log2|S_M| + log2|S_Mc| - log2|S|`` for a nonempty proper subset."""
    mask = _mask(m)
    _check_proper(mask, sys.n)
    return sys.logdet(mask) + sys.logdet(full_mask(sys.n) ^ mask) - sys.logdet_full


def gaussian_entropy(sys: GaussianSystem, m) -> float:
    """``log2|S_M|``, the Gaussian entropy up to an additive constant."""
    mask = _mask(m)
    if mask == 0:
        raise DomainError("entropy of the empty set is not defined here")
    return sys.logdet(mask)


class DiscreteSystem:
    """Joint probability table over ``n`` categorical variables (axis per variable)."""

    def __init__(self, p):
        p = np.asarray(p, dtype=float)
        if p.ndim < 1:
            raise InputError("joint table needs at least one variable axis")
        if p.size > _MAX_DISCRETE_CELLS:
            raise InputError(f"joint table has {p.size} cells; limit is {_MAX_DISCRETE_CELLS}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise InputError("joint table must be nonnegative and sum to 1")
        self.p = p
        self.n = p.ndim
        self._cache: dict[int, float] = {}

    def entropy(self, mask: int) -> float:
        if mask == 0:
            return 0.0
        hit = self._cache.get(mask)
        if hit is None:
            keep = set(indices_of(mask))
            drop = tuple(i for i in range(self.n) if i not in keep)
            q = self.p.sum(axis=drop) if drop else self.p
            q = q[q > 0]
            hit = float(-np.sum(q * np.log2(q)))
            self._cache[mask] = hit
        return hit


def discrete_entropy(sys: DiscreteSystem, m) -> float:
    """Shannon entropy (bits) of the marginal over ``m``; ``0 log 0 = 0``."""
    mask = _mask(m)
    if mask == 0:
        raise DomainError("entropy of the empty set is not defined here")
    return sys.entropy(mask)


def discrete_mi(sys: DiscreteSystem, m) -> float:
    mask = _mask(m)
    _check_proper(mask, sys.n)
    full = full_mask(sys.n)
    return sys.entropy(mask) + sys.entropy(full ^ mask) - sys.entropy(full)


# -- oracles -----------------------------------------------------------------

def entropy_oracle(sys) -> LossOracle:
    """Memoized ``H(S)`` with ``H(empty) = 0`` for any system exposing ``entropy``."""
    return LossOracle(sys.entropy, sys.n)


def mi_oracle(sys) -> LossOracle:
    """Memoized ``I(S; V \\ S)`` built from subset entropies.

    The empty and full sets map to 0 so the oracle is a set function on the
    whole power set.
    """
    full = full_mask(sys.n)
    h_full = sys.entropy(full)

    def f(mask: int) -> float:
        if mask == 0 or mask == full:
            return 0.0
        return sys.entropy(mask) + sys.entropy(full ^ mask) - h_full

    return LossOracle(f, sys.n)


class GaussianMIOracle(LossOracle):
    """Gaussian mutual information oracle with an incremental fast path.

    With ``fast=False`` every value comes from the closed form with fresh
    Cholesky factorizations of both sides.  With ``fast=True`` single values
    use ``log2|S_A| + log2|P_A|`` (``P`` the precision matrix, ``A`` the
    smaller side), which equals the closed form because
    ``log2|S_Ac| = log2|S| + log2|P_A|``; pendent-pair orderings then grow
    Cholesky factors of both ``S_W`` and ``P_W`` instead of refactorizing.

    ``record``, when set to a list, receives ``(mask, value)`` for every
    value the fast ordering computes.
    """

    def __init__(self, sys: GaussianSystem, fast: bool = True, memoize: bool = True):
        self.system = sys
        self.fast = fast
        self.record: list | None = None
        self._full = full_mask(sys.n)
        self._mats = None
        super().__init__(self._value, sys.n, memoize=memoize)

    def _value(self, mask: int) -> float:
        if mask == 0 or mask == self._full:
            return 0.0
        sys = self.system
        if not self.fast:
            return sys.logdet(mask) + sys.logdet(self._full ^ mask) - sys.logdet_full
        if 2 * popcount(mask) > sys.n:
            mask = self._full ^ mask
        idx = list(indices_of(mask))
        try:
            return (_chol_log2det(sys.sigma_eff[np.ix_(idx, idx)])
                    + _chol_log2det(sys.precision[np.ix_(idx, idx)]))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"subset {idx} is not positive definite") from exc

    def pendent_order(self, blocks: Sequence[int], singles: np.ndarray, start: int,
                      tie_tol: float) -> list[int] | None:
        """Whole greedy ordering in one compiled sweep, or None on the slow path.

        Keeps, for the covariance and the precision matrix alike, the rows of
        the Cholesky factor of ``M_W`` and the Schur complement of every block
        outside ``W``; appending a block extends the factor by its rows and
        downdates the stored complements, so each candidate value costs only
        two small log-determinants.
        """
        if not self.fast:
            return None
        sys = self.system
        if self._mats is None:
            self._mats = np.ascontiguousarray(np.stack([sys.sigma_eff, sys.precision]))
        index = [indices_of(b) for b in blocks]
        ptr = np.zeros(len(blocks) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([len(ix) for ix in index])
        idx = np.fromiter((i for ix in index for i in ix), dtype=np.int64, count=int(ptr[-1]))
        record = self.record is not None
        order, n_evals, status, rb, rp, rv = _kernels.chain_order(
            self._mats, ptr, idx, np.asarray(singles, dtype=float), start, tie_tol, record)
        if status != _kernels.OK:
            raise NumericalError("Schur complement lost positive definiteness")
        self.call_count += int(n_evals)
        order = [int(o) for o in order]
        if record:
            prefix = [0]
            for o in order:
                prefix.append(prefix[-1] | blocks[o])
            self.record.extend(
                (prefix[p] | blocks[b], float(v)) for b, p, v in zip(rb, rp, rv))
        return order
