"""Grid similarity scores over aligned row/column subsequences.

Two grids are compared by choosing order-preserving subsequences of rows
and of columns on each side (equal lengths), summing a per-slot
similarity over the aligned subgrids, and normalizing:

    score = 2 * best_sum / (Ma * Na + Mb * Nb)

The row/column choice is optimized by alternating one-axis dynamic
programs: fix the column pairing, solve the best monotone row pairing,
then the reverse, for at most four sweeps.  For small grids every
possible row pairing is used as a starting point, which makes the
alternation provably exact; larger grids fall back to a handful of
seeded starts.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .. import kernels
from ..merger import CellSet
from ..structure import grid_matrix_view

# Above this many candidate row pairings, switch to seeded starts.
MAX_ENUMERATED_STARTS = 512

_SWEEPS = 4
_TOL = 1e-12


def span_similarity(spans_a: np.ndarray, spans_b: np.ndarray) -> np.ndarray:
    """Pairwise span-rectangle IoU, shape (Ma, Mb, Na, Nb).

    Each grid slot carries (rowspan, colspan, row offset, col offset) of
    the cell covering it.  Relative to the slot, the cell occupies rows
    [-off_r, rowspan - off_r) and columns [-off_c, colspan - off_c);
    similarity is the IoU of the two rectangles.
    """
    a = spans_a.astype(np.float64)[:, None, :, None, :]
    b = spans_b.astype(np.float64)[None, :, None, :, :]
    top = np.maximum(-a[..., 2], -b[..., 2])
    bot = np.minimum(a[..., 0] - a[..., 2], b[..., 0] - b[..., 2])
    left = np.maximum(-a[..., 3], -b[..., 3])
    right = np.minimum(a[..., 1] - a[..., 3], b[..., 1] - b[..., 3])
    inter = np.clip(bot - top, 0.0, None) * np.clip(right - left, 0.0, None)
    union = a[..., 0] * a[..., 1] + b[..., 0] * b[..., 1] - inter
    return inter / union


def text_similarity(text_a: np.ndarray, text_b: np.ndarray) -> np.ndarray:
    """Pairwise normalized string similarity, shape (Ma, Mb, Na, Nb)."""
    ma, na = text_a.shape
    mb, nb = text_b.shape
    out = np.empty((ma, mb, na, nb), dtype=np.float64)
    cache: dict[tuple[str, str], float] = {}
    for i in range(ma):
        for j in range(na):
            s = text_a[i, j]
            for k in range(mb):
                for l in range(nb):
                    t = text_b[k, l]
                    val = cache.get((s, t))
                    if val is None:
                        if not s and not t:
                            val = 1.0
                        else:
                            codes_s = np.array([ord(c) for c in s], dtype=np.int32)
                            codes_t = np.array([ord(c) for c in t], dtype=np.int32)
                            dist = kernels.levenshtein(codes_s, codes_t)
                            val = 1.0 - dist / max(len(s), len(t))
                        cache[(s, t)] = val
                    out[i, k, j, l] = val
    return out


def _monotone_dp(score: np.ndarray) -> tuple[float, list[tuple[int, int]]]:
    """Best monotone index pairing for a nonnegative gain matrix."""
    n, m = score.shape
    dp = np.zeros((n + 1, m + 1), dtype=np.float64)
    for i in range(1, n + 1):
        row = score[i - 1]
        for k in range(1, m + 1):
            dp[i, k] = max(dp[i - 1, k], dp[i, k - 1], dp[i - 1, k - 1] + row[k - 1])
    pairs: list[tuple[int, int]] = []
    i, k = n, m
    while i > 0 and k > 0:
        if dp[i, k] == dp[i - 1, k]:
            i -= 1
        elif dp[i, k] == dp[i, k - 1]:
            k -= 1
        else:
            pairs.append((i - 1, k - 1))
            i -= 1
            k -= 1
    pairs.reverse()
    return float(dp[n, m]), pairs


def _col_marginal(sim: np.ndarray, rows: list[tuple[int, int]]) -> np.ndarray:
    ri = np.array([p[0] for p in rows], dtype=np.intp)
    ki = np.array([p[1] for p in rows], dtype=np.intp)
    return sim[ri, ki].sum(axis=0)


def _row_marginal(sim: np.ndarray, cols: list[tuple[int, int]]) -> np.ndarray:
    jc = np.array([p[0] for p in cols], dtype=np.intp)
    lc = np.array([p[1] for p in cols], dtype=np.intp)
    return sim[:, :, jc, lc].sum(axis=2)


def _refine(sim: np.ndarray, rows: list[tuple[int, int]]) -> float:
    """Alternate column/row solves from a starting row pairing."""
    best = 0.0
    for _ in range(_SWEEPS):
        _, cols = _monotone_dp(_col_marginal(sim, rows))
        if not cols:
            return best
        val, rows = _monotone_dp(_row_marginal(sim, cols))
        if not rows or val <= best + _TOL:
            return max(best, val)
        best = val
    return best


def alignment_score(sim: np.ndarray) -> float:
    """Best achievable aligned-subgrid similarity sum."""
    ma, mb, na, nb = sim.shape
    if min(ma, mb, na, nb) == 0:
        return 0.0
    k = min(ma, mb)
    starts: list[list[tuple[int, int]]]
    if math.comb(ma + mb, ma) <= MAX_ENUMERATED_STARTS:
        starts = []
        for p in range(1, k + 1):
            for ra in combinations(range(ma), p):
                for rb in combinations(range(mb), p):
                    starts.append(list(zip(ra, rb)))
    else:
        starts = [list(zip(range(k), range(k)))]
        _, seeded = _monotone_dp(sim.sum(axis=(2, 3)))
        if seeded:
            starts.append(seeded)
        _, cols0 = _monotone_dp(sim.sum(axis=(0, 1)))
        if cols0:
            _, rows0 = _monotone_dp(_row_marginal(sim, cols0))
            if rows0:
                starts.append(rows0)
    return max(_refine(sim, rows) for rows in starts)


def grits(a: CellSet, b: CellSet, mode: str = "top") -> float:
    """Grid similarity in [0, 1]; "top" compares spans, "con" text."""
    va = grid_matrix_view(a)
    vb = grid_matrix_view(b)
    if mode == "top":
        sim = span_similarity(va.spans, vb.spans)
    elif mode == "con":
        sim = text_similarity(va.text, vb.text)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ma, na = va.text.shape
    mb, nb = vb.text.shape
    denom = ma * na + mb * nb
    if denom == 0:
        return 1.0
    return 2.0 * alignment_score(sim) / denom
