"""Hot inner loops.

Every kernel exists twice: a numba ``@njit`` version and a pure numpy/python
version with the same contract. The dispatch names at the bottom pick one at
import time. Set ``BNGKIT_DISABLE_NUMBA=1`` to force the numpy path; it is also
used automatically when numba cannot be imported.
"""

import os

import numpy as np

TWO_PI = 2.0 * np.pi

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("BNGKIT_DISABLE_NUMBA", "0").lower() not in (
    "1",
    "true",
    "yes",
)


# -- greedy balancing order --------------------------------------------------


def greedy_order_numpy(alphas):
    """Greedy sign-balancing permutation.

    Returns ``(perm, stalls)``. ``stalls`` counts the steps where no entry of
    the required sign was left and the next unused entry was taken instead;
    it is zero for exactly zero-sum input.
    """
    a = np.asarray(alphas, dtype=np.float64)
    n = a.shape[0]
    nonpos = [i for i in range(n) if a[i] <= 0.0]
    nonneg = [i for i in range(n) if a[i] >= 0.0]
    used = np.zeros(n, dtype=np.bool_)
    perm = np.empty(n, dtype=np.int64)
    ip = 0
    iq = 0
    nxt = 0
    running = 0.0
    stalls = 0
    for step in range(n):
        pick = -1
        if running > 0.0:
            while ip < len(nonpos) and used[nonpos[ip]]:
                ip += 1
            if ip < len(nonpos):
                pick = nonpos[ip]
        else:
            while iq < len(nonneg) and used[nonneg[iq]]:
                iq += 1
            if iq < len(nonneg):
                pick = nonneg[iq]
        if pick < 0:
            while used[nxt]:
                nxt += 1
            pick = nxt
            stalls += 1
        used[pick] = True
        perm[step] = pick
        running += a[pick]
    return perm, stalls


def _greedy_order_loop(a):
    n = a.shape[0]
    used = np.zeros(n, dtype=np.bool_)
    perm = np.empty(n, dtype=np.int64)
    ip = 0  # cursor over candidates <= 0
    iq = 0  # cursor over candidates >= 0
    nxt = 0
    running = 0.0
    stalls = 0
    for step in range(n):
        pick = -1
        if running > 0.0:
            while ip < n and (used[ip] or a[ip] > 0.0):
                ip += 1
            if ip < n:
                pick = ip
        else:
            while iq < n and (used[iq] or a[iq] < 0.0):
                iq += 1
            if iq < n:
                pick = iq
        if pick < 0:
            while used[nxt]:
                nxt += 1
            pick = nxt
            stalls += 1
        used[pick] = True
        perm[step] = pick
        running += a[pick]
    return perm, stalls


# -- brute-force length oracle ------------------------------------------------


def ell_grid_numpy(phases, n_grid=100_000, chunk=8192):
    """min over ``n_grid`` rotations of the max chord from 1 to the rotated set."""
    th = np.asarray(phases, dtype=np.float64)
    c, s = np.cos(th), np.sin(th)
    best = -2.0
    for start in range(0, n_grid, chunk):
        alpha = TWO_PI * np.arange(start, min(start + chunk, n_grid)) / n_grid
        # cos(alpha + theta) for every pair; the farthest point minimizes it
        cosines = np.outer(np.cos(alpha), c) - np.outer(np.sin(alpha), s)
        best = max(best, float(cosines.min(axis=1).max()))
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * best)))


def _ell_grid_loop(th, n_grid):
    c = np.cos(th)
    s = np.sin(th)
    best = -2.0
    for k in range(n_grid):
        alpha = TWO_PI * k / n_grid
        ca = np.cos(alpha)
        sa = np.sin(alpha)
        worst = 2.0
        for i in range(th.shape[0]):
            v = ca * c[i] - sa * s[i]
            if v < worst:
                worst = v
        if worst > best:
            best = worst
    return np.sqrt(max(0.0, 2.0 - 2.0 * best))


# -- largest circular gap -----------------------------------------------------


def max_gap_numpy(sorted_phases):
    """Largest gap (and its start index) of sorted phases in [-pi, pi], wrap included.

    The wrap gap starts at the last element. Ties go to the lowest start index.
    """
    p = np.asarray(sorted_phases, dtype=np.float64)
    gaps = np.empty(p.shape[0])
    gaps[:-1] = np.diff(p)
    gaps[-1] = TWO_PI - (p[-1] - p[0])
    idx = int(np.argmax(gaps))
    return float(gaps[idx]), idx


def _max_gap_loop(p):
    n = p.shape[0]
    best = TWO_PI - (p[n - 1] - p[0])
    best_idx = n - 1
    for i in range(n - 1):
        g = p[i + 1] - p[i]
        if g > best or (g == best and i < best_idx):
            best = g
            best_idx = i
    return best, best_idx


if HAVE_NUMBA:
    _greedy_order_jit = njit(cache=True)(_greedy_order_loop)
    _ell_grid_jit = njit(cache=True)(_ell_grid_loop)
    _max_gap_jit = njit(cache=True)(_max_gap_loop)

    def greedy_order_numba(alphas):
        perm, stalls = _greedy_order_jit(np.ascontiguousarray(alphas, dtype=np.float64))
        return perm, int(stalls)

    def ell_grid_numba(phases, n_grid=100_000):
        return float(_ell_grid_jit(np.ascontiguousarray(phases, dtype=np.float64), n_grid))

    def max_gap_numba(sorted_phases):
        g, i = _max_gap_jit(np.ascontiguousarray(sorted_phases, dtype=np.float64))
        return float(g), int(i)

else:  # pragma: no cover
    greedy_order_numba = greedy_order_numpy
    ell_grid_numba = ell_grid_numpy
    max_gap_numba = max_gap_numpy


if USE_NUMBA:
    greedy_order_kernel = greedy_order_numba
    ell_grid_kernel = ell_grid_numba
    max_gap_kernel = max_gap_numba
else:
    greedy_order_kernel = greedy_order_numpy
    ell_grid_kernel = ell_grid_numpy
    max_gap_kernel = max_gap_numpy
