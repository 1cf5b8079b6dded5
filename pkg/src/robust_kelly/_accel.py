"""Hot numeric kernels, each with a numba and a plain-numpy implementation.

The numba path is used when numba imports cleanly and the environment
variable ``ROBUST_KELLY_DISABLE_NUMBA`` is unset (or ``0``). Both paths are
always importable so tests and the benchmark can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITERATION_LIMIT = 2

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _flag_disabled() -> bool:
    return os.environ.get("ROBUST_KELLY_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and not _flag_disabled()


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


# --------------------------------------------------------------------------
# simplex pivoting
# --------------------------------------------------------------------------

def _choose_entering(T, tol, rule):
    # T's last row holds reduced costs (z_j - c_j); entering needs rc < -tol.
    ncols = T.shape[1] - 1
    obj = T.shape[0] - 1
    best = -1
    best_val = -tol
    for j in range(ncols):
        rc = T[obj, j]
        if rc < -tol:
            if rule == 0:
                return j
            if rc < best_val:
                best_val = rc
                best = j
    return best


def _choose_leaving(T, basis, col, tol):
    nrows = T.shape[0] - 1
    rhs = T.shape[1] - 1
    best = -1
    best_ratio = np.inf
    for i in range(nrows):
        a = T[i, col]
        if a > tol:
            ratio = T[i, rhs] / a
            if best == -1 or ratio < best_ratio - 1e-12:
                best = i
                best_ratio = ratio
            elif ratio <= best_ratio + 1e-12 and basis[i] < basis[best]:
                best = i
                if ratio < best_ratio:
                    best_ratio = ratio
    return best


def _pivot_loop(T, row, col):
    nr, nc = T.shape
    p = T[row, col]
    for j in range(nc):
        T[row, j] /= p
    for i in range(nr):
        if i != row:
            f = T[i, col]
            if f != 0.0:
                for j in range(nc):
                    T[i, j] -= f * T[row, j]
        T[i, col] = 0.0 if i != row else 1.0


def _simplex_loop(T, basis, max_iter, tol, rule, stall_limit):
    """Run primal simplex pivots on tableau ``T`` in place.

    ``rule`` 0 is Bland's rule throughout; 1 is steepest reduced cost with a
    switch to Bland after ``stall_limit`` consecutive degenerate pivots.
    Returns ``(status, iterations)``.
    """
    rhs = T.shape[1] - 1
    iters = 0
    stall = 0
    active = rule
    while iters < max_iter:
        col = _choose_entering(T, tol, active)
        if col < 0:
            return STATUS_OPTIMAL, iters
        row = _choose_leaving(T, basis, col, tol)
        if row < 0:
            return STATUS_UNBOUNDED, iters
        if T[row, rhs] <= tol:
            stall += 1
            if stall >= stall_limit:
                active = 0
        else:
            stall = 0
            active = rule
        _pivot_loop(T, row, col)
        basis[row] = col
        iters += 1
    return STATUS_ITERATION_LIMIT, iters


def _pivot_numpy(T, row, col):
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0


def _simplex_numpy(T, basis, max_iter, tol, rule, stall_limit):
    rhs = T.shape[1] - 1
    obj = T.shape[0] - 1
    iters = 0
    stall = 0
    active = rule
    while iters < max_iter:
        rc = T[obj, :rhs]
        neg = np.flatnonzero(rc < -tol)
        if neg.size == 0:
            return STATUS_OPTIMAL, iters
        if active == 0:
            col = int(neg[0])
        else:
            col = int(np.argmin(rc))
        a = T[:obj, col]
        rows = np.flatnonzero(a > tol)
        if rows.size == 0:
            return STATUS_UNBOUNDED, iters
        ratios = T[rows, rhs] / a[rows]
        row = _first_min_leaving(T, basis, rows, ratios)
        if T[row, rhs] <= tol:
            stall += 1
            if stall >= stall_limit:
                active = 0
        else:
            stall = 0
            active = rule
        _pivot_numpy(T, row, col)
        basis[row] = col
        iters += 1
    return STATUS_ITERATION_LIMIT, iters


def _first_min_leaving(T, basis, rows, ratios):
    # sequential scan identical to _choose_leaving, so both paths pick the same row
    best = -1
    best_ratio = np.inf
    for idx in range(rows.size):
        i = rows[idx]
        ratio = ratios[idx]
        if best == -1 or ratio < best_ratio - 1e-12:
            best = i
            best_ratio = ratio
        elif ratio <= best_ratio + 1e-12 and basis[i] < basis[best]:
            best = i
            if ratio < best_ratio:
                best_ratio = ratio
    return int(best)


# --------------------------------------------------------------------------
# wealth paths and drawdowns
# --------------------------------------------------------------------------

def _wealth_loop(growth, v0):
    # growth[k] = K^T Xtilde(k); stops at the first non-positive value
    n = growth.shape[0]
    v = np.empty(n + 1)
    v[0] = v0
    for k in range(n):
        v[k + 1] = v[k] * (1.0 + growth[k])
        if v[k + 1] <= 0.0:
            return v[: k + 2]
    return v


def _wealth_numpy(growth, v0):
    factors = 1.0 + growth
    bad = np.flatnonzero(factors <= 0.0)
    if bad.size:
        factors = factors[: bad[0] + 1]
    v = np.empty(factors.size + 1)
    v[0] = v0
    # sequential product keeps the rounding identical to the loop kernel
    np.multiply.accumulate(np.concatenate(([v0], factors)), out=v)
    return v


def _drawdown_loop(v):
    peak = v[0]
    worst = 0.0
    for k in range(v.shape[0]):
        if v[k] > peak:
            peak = v[k]
        dd = (peak - v[k]) / peak
        if dd > worst:
            worst = dd
    return worst


def _drawdown_numpy(v):
    peak = np.maximum.accumulate(v)
    return float(max(0.0, np.max((peak - v) / peak)))


def _min_partial_sum_loop(s):
    # min over 0 <= l <= k <= N of sum_{i=l}^{k-1} s[i] (the empty sum is 0)
    best = 0.0
    run_max = 0.0
    c = 0.0
    for i in range(s.shape[0]):
        c += s[i]
        if c - run_max < best:
            best = c - run_max
        if c > run_max:
            run_max = c
    return best


def _min_partial_sum_numpy(s):
    c = np.concatenate(([0.0], np.cumsum(s)))
    return float(np.min(c - np.maximum.accumulate(c)))


def _envelope_gap_loop(x, a, b):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        m = np.inf
        for l in range(a.shape[0]):
            h = a[l] * x[i] + b[l]
            if h < m:
                m = h
        out[i] = m - np.log1p(x[i])
    return out


def _envelope_gap_numpy(x, a, b):
    return np.min(np.outer(x, a) + b, axis=1) - np.log1p(x)


wealth_nb = _njit(_wealth_loop)
drawdown_nb = _njit(_drawdown_loop)
min_partial_sum_nb = _njit(_min_partial_sum_loop)
envelope_gap_nb = _njit(_envelope_gap_loop)
if HAVE_NUMBA:
    # helpers are rebound first so the jitted loop resolves them as jitted callees
    _choose_entering = numba.njit(cache=True)(_choose_entering)
    _choose_leaving = numba.njit(cache=True)(_choose_leaving)
    _pivot_loop = numba.njit(cache=True)(_pivot_loop)
    simplex_loop_nb = numba.njit(cache=True)(_simplex_loop)
else:  # pragma: no cover
    simplex_loop_nb = _simplex_loop

NUMPY_KERNELS = {
    "simplex": _simplex_numpy,
    "wealth": _wealth_numpy,
    "drawdown": _drawdown_numpy,
    "min_partial_sum": _min_partial_sum_numpy,
    "envelope_gap": _envelope_gap_numpy,
}

NUMBA_KERNELS = {
    "simplex": simplex_loop_nb,
    "wealth": wealth_nb,
    "drawdown": drawdown_nb,
    "min_partial_sum": min_partial_sum_nb,
    "envelope_gap": envelope_gap_nb,
}


def kernel(name: str, use_numba: bool | None = None):
    """Return the kernel ``name`` for the selected backend."""
    if use_numba is None:
        use_numba = USE_NUMBA
    table = NUMBA_KERNELS if (use_numba and HAVE_NUMBA) else NUMPY_KERNELS
    return table[name]
