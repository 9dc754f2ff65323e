"""Numba kernels for the string-matching and assignment hot paths.

All kernels release the GIL so batch drivers can fan out across threads.
Call :func:`warmup` once per process before timing anything; the first call
of each kernel triggers JIT compilation (results are cached on disk).
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def lev_distance(a, b):
    """Two-row unit-cost edit distance over int32 code arrays."""
    m = a.shape[0]
    n = b.shape[0]
    if m == 0:
        return n
    if n == 0:
        return m
    prev = np.empty(n + 1, np.int32)
    cur = np.empty(n + 1, np.int32)
    for j in range(n + 1):
        prev[j] = j
    for i in range(1, m + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, n + 1):
            v = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            v2 = prev[j] + 1
            if v2 < v:
                v = v2
            v3 = cur[j - 1] + 1
            if v3 < v:
                v = v3
            cur[j] = v
        tmp = prev
        prev = cur
        cur = tmp
    return prev[n]


@njit(cache=True, nogil=True)
def _banded_window_distance(needle, hay, start, t, prev, cur):
    """Distance between needle and hay[start:start+n] if <= t, else t + 1.

    Ukkonen band |i - j| <= t; aborts as soon as a full DP row exceeds t.
    ``prev``/``cur`` are scratch buffers of length >= 2 * t + 1.
    """
    n = needle.shape[0]
    big = n + t + 2
    width = 2 * t + 1
    for k in range(width):
        j = k - t
        prev[k] = j if 0 <= j <= n else big
    for i in range(1, n + 1):
        row_min = big
        ci = needle[i - 1]
        for k in range(width):
            j = i + k - t
            if j < 0 or j > n:
                cur[k] = big
                continue
            if j == 0:
                cur[k] = i
            else:
                v = prev[k] + (0 if ci == hay[start + j - 1] else 1)
                if k + 1 < width:
                    v2 = prev[k + 1] + 1
                    if v2 < v:
                        v = v2
                if k >= 1:
                    v3 = cur[k - 1] + 1
                    if v3 < v:
                        v = v3
                cur[k] = v
            if cur[k] < row_min:
                row_min = cur[k]
        if row_min > t:
            return t + 1
        for k in range(width):
            prev[k] = cur[k]
    d = prev[t]
    return d if d <= t else t + 1


@njit(cache=True, nogil=True)
def scan_windows(needle, hay, starts, bounds, init_best, cell_budget):
    """Minimum same-length window distance, visiting windows in bound order.

    ``starts`` lists window start offsets sorted by an admissible lower bound
    (``bounds``, ascending).  A window is verified with a banded DP at
    threshold best-so-far minus one; once a bound reaches the best-so-far the
    remaining windows cannot improve and the scan stops.  The result equals
    the exhaustive minimum because the bounds never exceed true distances.

    A non-positive ``cell_budget`` means unlimited.  Returns (best, next),
    where ``next`` is ``starts.shape[0]`` if the scan ran to completion and
    otherwise the position where the budget ran out; in that case the true
    minimum is >= min(best, bounds[next]).
    """
    n = needle.shape[0]
    best = init_best
    prev = np.empty(2 * n + 1, np.int32)
    cur = np.empty(2 * n + 1, np.int32)
    spent = 0
    for idx in range(starts.shape[0]):
        if bounds[idx] >= best:
            break
        t = best - 1
        if t < 0:
            break
        if t > n:
            t = n
        if cell_budget > 0 and spent > cell_budget:
            return best, idx
        spent += n * (2 * t + 1)
        d = _banded_window_distance(needle, hay, starts[idx], t, prev, cur)
        if d < best:
            best = d
    return best, starts.shape[0]


@njit(cache=True, nogil=True)
def naive_window_scan(needle, hay):
    """Full-matrix distance of every same-length window; no pruning.

    Kept as the reference scan; the production path must agree with it.
    """
    n = needle.shape[0]
    m = hay.shape[0]
    best = n
    prev = np.empty(n + 1, np.int32)
    cur = np.empty(n + 1, np.int32)
    for start in range(m - n + 1):
        for j in range(n + 1):
            prev[j] = j
        for i in range(1, n + 1):
            cur[0] = i
            ci = needle[i - 1]
            for j in range(1, n + 1):
                v = prev[j - 1] + (0 if ci == hay[start + j - 1] else 1)
                v2 = prev[j] + 1
                if v2 < v:
                    v = v2
                v3 = cur[j - 1] + 1
                if v3 < v:
                    v = v3
                cur[j] = v
            tmp = prev
            prev = cur
            cur = tmp
        if prev[n] < best:
            best = prev[n]
    return best


@njit(cache=True, nogil=True)
def count_lower_bounds(needle_sym, hay_sym, n_symbols):
    """Per-window character-count lower bound on the edit distance.

    For equal-length strings each substitution changes the total count
    discrepancy by at most 2 and each insert/delete pair by at most 2, so
    d >= ceil(sum_c |count_a(c) - count_b(c)| / 2).  Sliding update is O(1)
    per window.
    """
    n = needle_sym.shape[0]
    m = hay_sym.shape[0]
    n_windows = m - n + 1
    lbs = np.empty(n_windows, np.int32)
    cnt = np.zeros(n_symbols, np.int32)
    for i in range(n):
        cnt[needle_sym[i]] -= 1
    sumabs = n
    for j in range(n):
        c = hay_sym[j]
        sumabs -= abs(cnt[c])
        cnt[c] += 1
        sumabs += abs(cnt[c])
    lbs[0] = (sumabs + 1) // 2
    for w in range(1, n_windows):
        c = hay_sym[w - 1]
        sumabs -= abs(cnt[c])
        cnt[c] -= 1
        sumabs += abs(cnt[c])
        c = hay_sym[w + n - 1]
        sumabs -= abs(cnt[c])
        cnt[c] += 1
        sumabs += abs(cnt[c])
        lbs[w] = (sumabs + 1) // 2
    return lbs


@njit(cache=True, nogil=True)
def infix_end_distances(needle, hay):
    """Semi-global DP: E[j] = min distance of needle vs substrings ending at j.

    Free start in the haystack (row zero all zeros).  E[j] lower-bounds the
    distance of the fixed-length window ending at j, which makes it an
    admissible prefilter for :func:`scan_windows`.
    """
    n = needle.shape[0]
    m = hay.shape[0]
    prev = np.zeros(m + 1, np.int32)
    cur = np.empty(m + 1, np.int32)
    for p in range(1, n + 1):
        cur[0] = p
        cp = needle[p - 1]
        for j in range(1, m + 1):
            v = prev[j - 1] + (0 if cp == hay[j - 1] else 1)
            v2 = prev[j] + 1
            if v2 < v:
                v = v2
            v3 = cur[j - 1] + 1
            if v3 < v:
                v = v3
            cur[j] = v
        tmp = prev
        prev = cur
        cur = tmp
    return prev.copy()


@njit(cache=True, nogil=True)
def assign_min_cost(cost):
    """Hungarian algorithm (potentials + shortest augmenting paths), O(n^3).

    ``cost`` is a square float64 matrix.  Returns an array ``p`` where column
    j is matched to row ``p[j] - 1``.
    """
    n = cost.shape[0]
    inf = np.inf
    u = np.zeros(n + 1, np.float64)
    v = np.zeros(n + 1, np.float64)
    p = np.zeros(n + 1, np.int64)
    way = np.zeros(n + 1, np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, inf, np.float64)
        used = np.zeros(n + 1, np.bool_)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    return p[1:]


def warmup() -> None:
    """Force JIT compilation of every kernel with tiny inputs."""
    a = np.array([1, 2, 3], np.int32)
    b = np.array([1, 3], np.int32)
    lev_distance(a, b)
    naive_window_scan(b, a)
    sym = np.array([0, 1, 0], np.int32)
    count_lower_bounds(sym[:2], sym, 2)
    infix_end_distances(b, a)
    scan_windows(
        b, a, np.zeros(1, np.int64), np.zeros(1, np.int32), b.shape[0], 0
    )
    assign_min_cost(np.zeros((2, 2), np.float64))
