"""Compiled inner loop of the Gaussian pendent-pair sweep.

One call builds a whole greedy ordering.  Both the covariance and the
precision matrix are handled in the same pass (leading axis of ``mats``).
Blocks are given in CSR form: block ``c`` owns ``idx[ptr[c]:ptr[c + 1]]``.
"""

import math

import numpy as np
from numba import njit

_INV_LN2 = 1.0 / math.log(2.0)

#: status codes returned by the kernel
OK = 0
NOT_PD = 1


@njit(cache=True)
def _chol_inplace(a, s):
    """Lower Cholesky of the leading ``s x s`` part of ``a``; returns log2 det or nan."""
    logdet = 0.0
    for j in range(s):
        d = a[j, j]
        for q in range(j):
            d -= a[j, q] * a[j, q]
        if d <= 0.0:
            return np.nan
        d = math.sqrt(d)
        a[j, j] = d
        logdet += 2.0 * math.log(d) * _INV_LN2
        for i in range(j + 1, s):
            v = a[i, j]
            for q in range(j):
                v -= a[i, q] * a[j, q]
            a[i, j] = v / d
    return logdet


@njit(cache=True)
def _block_logdet(comp, off, s, scratch):
    if s == 1:
        x = comp[off]
        if x <= 0.0:
            return np.nan
        return math.log(x) * _INV_LN2
    for i in range(s):
        for j in range(s):
            scratch[i, j] = comp[off + i * s + j]
    return _chol_inplace(scratch, s)


@njit(cache=True)
def _add_block(b, mats, ptr, idx, off, comp, z, k, in_w, scratch, rows):
    """Append block ``b`` to W on both sides; returns (log2 det increment, status)."""
    n = mats.shape[1]
    m = ptr.shape[0] - 1
    s = ptr[b + 1] - ptr[b]
    inc = 0.0
    for a in range(2):
        for i in range(s):
            for j in range(s):
                scratch[i, j] = comp[a, off[b] + i * s + j]
        ld = _chol_inplace(scratch, s)
        if np.isnan(ld):
            return 0.0, NOT_PD
        inc += ld
        for r in range(s):
            col = idx[ptr[b] + r]
            for t in range(n):
                rows[r, t] = mats[a, col, t]
            for j in range(k):
                w = z[a, j, col]
                if w != 0.0:
                    for t in range(n):
                        rows[r, t] -= w * z[a, j, t]
            for q in range(r):
                w = scratch[r, q]
                for t in range(n):
                    rows[r, t] -= w * rows[q, t]
            d = scratch[r, r]
            for t in range(n):
                rows[r, t] /= d
                z[a, k + r, t] = rows[r, t]
        # downdate the stored Schur complements of blocks still outside W
        for c in range(m):
            if in_w[c] or c == b:
                continue
            p0 = ptr[c]
            sc = ptr[c + 1] - p0
            o = off[c]
            for r in range(s):
                for i in range(sc):
                    vi = rows[r, idx[p0 + i]]
                    for j in range(sc):
                        comp[a, o + i * sc + j] -= vi * rows[r, idx[p0 + j]]
    return inc, OK


@njit(cache=True)
def chain_order(mats, ptr, idx, singles, start, tie_tol, record):
    """Greedy pendent-pair ordering for Gaussian mutual information.

    Returns ``(order, n_evals, status, rec_blocks, rec_pos, rec_vals)``.
    ``rec_pos[e]`` is the chain length ``|order|`` when evaluation ``e`` was
    made; the recorded set is ``order[:rec_pos[e]]`` plus ``rec_blocks[e]``.
    """
    n = mats.shape[1]
    m = ptr.shape[0] - 1
    order = np.empty(m, dtype=np.int64)
    sizes = ptr[1:] - ptr[:-1]
    off = np.zeros(m + 1, dtype=np.int64)
    for c in range(m):
        off[c + 1] = off[c] + sizes[c] * sizes[c]
    comp = np.empty((2, off[m]))
    for a in range(2):
        for c in range(m):
            s = sizes[c]
            for i in range(s):
                for j in range(s):
                    comp[a, off[c] + i * s + j] = mats[a, idx[ptr[c] + i], idx[ptr[c] + j]]
    smax = sizes.max()
    scratch = np.empty((smax, smax))
    rows = np.empty((smax, n))
    z = np.empty((2, n, n))
    in_w = np.zeros(m, dtype=np.bool_)
    keys = np.empty(m)
    cap = m * m if record else 1
    rec_blocks = np.empty(cap, dtype=np.int64)
    rec_pos = np.empty(cap, dtype=np.int64)
    rec_vals = np.empty(cap)
    n_evals = 0

    base, status = _add_block(start, mats, ptr, idx, off, comp, z, 0, in_w, scratch, rows)
    if status != OK:
        return order, n_evals, status, rec_blocks[:0], rec_pos[:0], rec_vals[:0]
    k = sizes[start]
    in_w[start] = True
    order[0] = start
    for step in range(1, m):
        left = m - step
        if left == 1:
            for c in range(m):
                if not in_w[c]:
                    order[step] = c
            break
        best = np.inf
        for c in range(m):
            if in_w[c]:
                continue
            v = base
            for a in range(2):
                v += _block_logdet(comp[a], off[c], sizes[c], scratch)
            if np.isnan(v):
                return order, n_evals, NOT_PD, rec_blocks[:0], rec_pos[:0], rec_vals[:0]
            if record:
                rec_blocks[n_evals] = c
                rec_pos[n_evals] = step
                rec_vals[n_evals] = v
            n_evals += 1
            keys[c] = v - singles[c]
            if keys[c] < best:
                best = keys[c]
        bound = best + tie_tol * max(1.0, abs(best))
        pick = -1
        for c in range(m):
            if not in_w[c] and keys[c] <= bound:
                pick = c
                break
        order[step] = pick
        in_w[pick] = True
        if left > 2:
            inc, status = _add_block(pick, mats, ptr, idx, off, comp, z, k, in_w, scratch, rows)
            if status != OK:
                return order, n_evals, status, rec_blocks[:0], rec_pos[:0], rec_vals[:0]
            base += inc
            k += sizes[pick]
    return order, n_evals, OK, rec_blocks[:n_evals], rec_pos[:n_evals], rec_vals[:n_evals]
