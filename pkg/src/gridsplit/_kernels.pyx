# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: ordered tree edit distance and Levenshtein.

Contracts match gridsplit._kernels_py exactly; see there for the
reference semantics.
"""

import numpy as np

cimport numpy as cnp


def forest_distance(lml1, kr1, lml2, kr2, sub):
    cdef cnp.int64_t[::1] l1 = np.ascontiguousarray(lml1, dtype=np.int64)
    cdef cnp.int64_t[::1] k1 = np.ascontiguousarray(kr1, dtype=np.int64)
    cdef cnp.int64_t[::1] l2 = np.ascontiguousarray(lml2, dtype=np.int64)
    cdef cnp.int64_t[::1] k2 = np.ascontiguousarray(kr2, dtype=np.int64)
    cdef cnp.float64_t[:, ::1] s = np.ascontiguousarray(sub, dtype=np.float64)
    cdef Py_ssize_t n = l1.shape[0]
    cdef Py_ssize_t m = l2.shape[0]
    if n == 0 or m == 0:
        return float(max(n, m))
    td_arr = np.zeros((n, m), dtype=np.float64)
    fd_arr = np.zeros((n + 1, m + 1), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] td = td_arr
    cdef cnp.float64_t[:, ::1] fd = fd_arr
    cdef Py_ssize_t a, b, i, j, x, y, node1, node2, li, lj, ioff, joff, rows, cols, p, q
    cdef cnp.float64_t best, cand
    cdef bint whole1
    for a in range(k1.shape[0]):
        i = k1[a]
        li = l1[i]
        ioff = li - 1
        rows = i - li + 2
        for b in range(k2.shape[0]):
            j = k2[b]
            lj = l2[j]
            joff = lj - 1
            cols = j - lj + 2
            fd[0, 0] = 0.0
            for x in range(1, rows):
                fd[x, 0] = fd[x - 1, 0] + 1.0
            for y in range(1, cols):
                fd[0, y] = fd[0, y - 1] + 1.0
            for x in range(1, rows):
                node1 = x + ioff
                whole1 = l1[node1] == li
                for y in range(1, cols):
                    node2 = y + joff
                    if whole1 and l2[node2] == lj:
                        best = fd[x - 1, y - 1] + s[node1, node2]
                        cand = fd[x - 1, y] + 1.0
                        if cand < best:
                            best = cand
                        cand = fd[x, y - 1] + 1.0
                        if cand < best:
                            best = cand
                        fd[x, y] = best
                        td[node1, node2] = best
                    else:
                        p = l1[node1] - 1 - ioff
                        q = l2[node2] - 1 - joff
                        best = fd[p, q] + td[node1, node2]
                        cand = fd[x - 1, y] + 1.0
                        if cand < best:
                            best = cand
                        cand = fd[x, y - 1] + 1.0
                        if cand < best:
                            best = cand
                        fd[x, y] = best
    return float(td[n - 1, m - 1])


def levenshtein(a, b):
    cdef cnp.int32_t[::1] sa = np.ascontiguousarray(a, dtype=np.int32)
    cdef cnp.int32_t[::1] sb = np.ascontiguousarray(b, dtype=np.int32)
    cdef Py_ssize_t la = sa.shape[0]
    cdef Py_ssize_t lb = sb.shape[0]
    if la < lb:
        sa, sb = sb, sa
        la, lb = lb, la
    if lb == 0:
        return int(la)
    row_arr = np.arange(lb + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] row = row_arr
    cdef Py_ssize_t i, j
    cdef cnp.int64_t diag, tmp, best
    for i in range(1, la + 1):
        diag = row[0]
        row[0] = i
        for j in range(1, lb + 1):
            tmp = row[j]
            best = diag if sa[i - 1] == sb[j - 1] else diag + 1
            if row[j] + 1 < best:
                best = row[j] + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best
            diag = tmp
    return int(row[lb])
