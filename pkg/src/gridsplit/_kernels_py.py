"""Pure-Python twins of the compiled kernels.

Same contracts as gridsplit._kernels; used when the extension is not
built or GRIDSPLIT_PURE=1 forces them.
"""

from __future__ import annotations

import numpy as np


def forest_distance(lml1, kr1, lml2, kr2, sub) -> float:
    """Ordered tree edit distance over postorder-indexed trees.

    lml*: per-node leftmost-leaf-descendant index; kr*: keyroots in
    ascending order; sub[i, j]: substitution cost between node i of the
    first tree and node j of the second.  Insert/delete cost 1.
    """
    lml1 = [int(v) for v in lml1]
    lml2 = [int(v) for v in lml2]
    n, m = len(lml1), len(lml2)
    if n == 0 or m == 0:
        return float(max(n, m))
    sub = np.asarray(sub, dtype=np.float64)
    td = [[0.0] * m for _ in range(n)]
    fd = [[0.0] * (m + 1) for _ in range(n + 1)]
    for i in (int(v) for v in kr1):
        li = lml1[i]
        ioff = li - 1
        rows = i - li + 2
        for j in (int(v) for v in kr2):
            lj = lml2[j]
            joff = lj - 1
            cols = j - lj + 2
            fd[0][0] = 0.0
            for x in range(1, rows):
                fd[x][0] = fd[x - 1][0] + 1.0
            for y in range(1, cols):
                fd[0][y] = fd[0][y - 1] + 1.0
            for x in range(1, rows):
                node1 = x + ioff
                whole1 = lml1[node1] == li
                for y in range(1, cols):
                    node2 = y + joff
                    if whole1 and lml2[node2] == lj:
                        best = fd[x - 1][y - 1] + float(sub[node1][node2])
                        cand = fd[x - 1][y] + 1.0
                        if cand < best:
                            best = cand
                        cand = fd[x][y - 1] + 1.0
                        if cand < best:
                            best = cand
                        fd[x][y] = best
                        td[node1][node2] = best
                    else:
                        p = lml1[node1] - 1 - ioff
                        q = lml2[node2] - 1 - joff
                        best = fd[p][q] + td[node1][node2]
                        cand = fd[x - 1][y] + 1.0
                        if cand < best:
                            best = cand
                        cand = fd[x][y - 1] + 1.0
                        if cand < best:
                            best = cand
                        fd[x][y] = best
    return td[n - 1][m - 1]


def levenshtein(a, b) -> int:
    """Edit distance between two code sequences (unit costs)."""
    a = list(a)
    b = list(b)
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[-1]
