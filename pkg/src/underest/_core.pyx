# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled split-search and tree-traversal kernels.

Every floating-point expression here mirrors ``_fallback.py`` operation for
operation so both backends choose bitwise-identical splits.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _proxy(double c, double cnt, double total, double tot_cnt,
                          int criterion) noexcept nogil:
    cdef double rc = total - c
    cdef double rcnt = tot_cnt - cnt
    if criterion == 0:
        return ((c * c + (cnt - c) * (cnt - c)) / cnt
                + (rc * rc + (rcnt - rc) * (rcnt - rc)) / rcnt)
    return c * c / cnt + rc * rc / rcnt


def best_split(const double[:, ::1] X, const Py_ssize_t[:, ::1] order,
               const double[::1] target, Py_ssize_t min_leaf, int criterion):
    """Scan every column of ``X`` for the best binary split.

    Returns ``(column, threshold, gain)``; ``column`` is -1 when no
    admissible split exists.
    """
    cdef Py_ssize_t m = X.shape[0]
    cdef Py_ssize_t f = X.shape[1]
    cdef Py_ssize_t i, j, r
    cdef double acc, total, parent, cnt, proxy, gain, a, b, thr
    cdef double n = <double>m
    cdef Py_ssize_t best_col = -1
    cdef Py_ssize_t best_pos = -1
    cdef double best_gain = -1.0
    cdef double[::1] cum = np.empty(m, dtype=np.float64)

    if m < 2 * min_leaf or m < 2:
        return -1, 0.0, 0.0

    with nogil:
        for j in range(f):
            acc = 0.0
            for i in range(m):
                acc = acc + target[order[i, j]]
                cum[i] = acc
            total = cum[m - 1]
            if criterion == 0:
                parent = (total * total + (n - total) * (n - total)) / n
            else:
                parent = total * total / n
            for i in range(min_leaf - 1, m - min_leaf):
                a = X[order[i, j], j]
                b = X[order[i + 1, j], j]
                if not (a < b):
                    continue
                cnt = <double>(i + 1)
                proxy = _proxy(cum[i], cnt, total, n, criterion)
                gain = proxy - parent
                if best_col < 0 or gain > best_gain:
                    best_gain = gain
                    best_col = j
                    best_pos = i

    if best_col < 0:
        return -1, 0.0, 0.0
    a = X[order[best_pos, best_col], best_col]
    b = X[order[best_pos + 1, best_col], best_col]
    thr = (a + b) / 2.0
    if not (thr < b):
        thr = a
    return best_col, thr, best_gain


def apply_tree(const double[:, ::1] X, const Py_ssize_t[::1] feature,
               const double[::1] threshold, const Py_ssize_t[::1] left,
               const Py_ssize_t[::1] right):
    """Return the leaf index reached by every row of ``X``."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t i, node
    out = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] res = out
    with nogil:
        for i in range(n):
            node = 0
            while left[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            res[i] = node
    return out
