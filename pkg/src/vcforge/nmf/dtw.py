"""Dynamic time warping with Euclidean frame distance."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

# backtrace preference on ties: diagonal, then vertical (advance a), then horizontal
_STEPS = ((1, 1), (1, 0), (0, 1))


def dtw_align(a: np.ndarray, b: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    """Optimal monotonic alignment of ``a`` [T_a, F] and ``b`` [T_b, F].

    Steps are (1,0), (0,1) and (1,1); the cost is the sum of local distances
    along the path, including both endpoints. Returns ``(path, cost)``.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("dtw_align needs two nonempty sequences")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"frame dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    local = cdist(a, b, metric="euclidean")
    n, m = local.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        row = local[i - 1]
        prev = acc[i - 1]
        cur = acc[i]
        # diagonal and vertical predecessors vectorized; horizontal is a running scan
        best = np.minimum(prev[:-1], prev[1:])
        for j in range(1, m + 1):
            cur[j] = row[j - 1] + min(best[j - 1], cur[j - 1])
    path = [(n - 1, m - 1)]
    i, j = n, m
    while (i, j) != (1, 1):
        candidates = []
        for di, dj in _STEPS:
            pi, pj = i - di, j - dj
            if pi >= 1 and pj >= 1:
                candidates.append((acc[pi, pj], pi, pj))
        # min() keeps the first of equal costs, which follows _STEPS order
        _, i, j = min(candidates, key=lambda c: c[0])
        path.append((i - 1, j - 1))
    path.reverse()
    return path, float(acc[n, m])


def aligned_pairs(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Frames of ``a`` and ``b`` gathered along their DTW path."""
    path, _ = dtw_align(a, b)
    ia, ib = np.array(path).T
    return np.asarray(a)[ia], np.asarray(b)[ib]
