"""Maximum-weight one-to-one bipartite matching on a rectangular score matrix.

Solved as an assignment problem on the square zero-padded matrix (padding
means "leave unmatched").  Score sums are what the accuracy reward needs;
the pair list returned by :func:`max_weight_matching` additionally breaks
ties deterministically: among all maximizing matchings it returns the one
whose sorted pair list is lexicographically smallest (the empty suffix
sorting before any pair).
"""

from __future__ import annotations

import numpy as np

from . import _kernels

__all__ = ["matching_value", "max_weight_matching"]

_EPS = 1e-9


def _as_matrix(scores, n_rows=None, n_cols=None) -> np.ndarray:
    m = np.asarray(scores, dtype=np.float64)
    if m.size == 0:
        m = m.reshape((n_rows or 0, n_cols or 0))
    if m.ndim != 2:
        raise ValueError("scores must be a 2-D matrix")
    if n_rows is not None and m.shape[0] != n_rows:
        raise ValueError(f"expected {n_rows} rows, got {m.shape[0]}")
    if n_cols is not None and m.shape[1] != n_cols:
        raise ValueError(f"expected {n_cols} cols, got {m.shape[1]}")
    if m.size and (not np.all(np.isfinite(m)) or np.any(m < 0)):
        raise ValueError("scores must be finite and non-negative")
    return m


def matching_value(scores, n_rows=None, n_cols=None) -> float:
    """Total score of a maximum-weight partial matching."""
    m = _as_matrix(scores, n_rows, n_cols)
    r, c = m.shape
    if r == 0 or c == 0:
        return 0.0
    k = max(r, c)
    cost = np.zeros((k, k), dtype=np.float64)
    cost[:r, :c] = -m
    assign = _kernels.assign_min_cost(cost)
    value = 0.0
    for j in range(k):
        i = int(assign[j]) - 1
        if i < r and j < c:
            value += m[i, j]
    return float(value)


def _restricted_value(m: np.ndarray, row_from: int, cols: list[int]) -> float:
    if row_from >= m.shape[0] or not cols:
        return 0.0
    return matching_value(m[row_from:, :][:, cols])


def max_weight_matching(scores, n_rows=None, n_cols=None) -> list[tuple[int, int]]:
    """Pairs (i, j) of a maximum-weight one-to-one partial matching.

    Deterministic: returns the lexicographically smallest optimal pair list.
    Built greedily; each candidate pair is kept only if the best completion
    over the remaining rows/columns still reaches the optimal total.
    """
    m = _as_matrix(scores, n_rows, n_cols)
    r, c = m.shape
    if r == 0 or c == 0:
        return []
    best = matching_value(m)
    pairs: list[tuple[int, int]] = []
    total = 0.0
    free_cols = list(range(c))
    row = 0
    while total < best - _EPS and row < r:
        chosen = None
        for i in range(row, r):
            for j in free_cols:
                rest_cols = [x for x in free_cols if x != j]
                val = m[i, j] + _restricted_value(m, i + 1, rest_cols)
                if total + val >= best - _EPS:
                    chosen = (i, j)
                    break
            if chosen:
                break
        if chosen is None:
            break
        i, j = chosen
        pairs.append((i, j))
        total += m[i, j]
        free_cols.remove(j)
        row = i + 1
    return pairs
