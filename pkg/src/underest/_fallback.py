"""Pure-numpy versions of the kernels in ``_core.pyx``.

The arithmetic is kept in the same order as the compiled kernels so that
both backends select identical splits.
"""
import numpy as np


def _proxy(c, cnt, total, tot_cnt, criterion):
    rc = total - c
    rcnt = tot_cnt - cnt
    if criterion == 0:
        return ((c * c + (cnt - c) * (cnt - c)) / cnt
                + (rc * rc + (rcnt - rc) * (rcnt - rc)) / rcnt)
    return c * c / cnt + rc * rc / rcnt


def best_split(X, order, target, min_leaf, criterion):
    m, f = X.shape
    if m < 2 * min_leaf or m < 2:
        return -1, 0.0, 0.0
    n = float(m)
    xs = np.take_along_axis(X, order, axis=0)
    cum = np.cumsum(target[order], axis=0)
    total = cum[m - 1]
    if criterion == 0:
        parent = (total * total + (n - total) * (n - total)) / n
    else:
        parent = total * total / n

    lo, hi = min_leaf - 1, m - min_leaf
    if hi <= lo:
        return -1, 0.0, 0.0
    cnt = np.arange(lo + 1, hi + 1, dtype=np.float64)[:, None]
    proxy = _proxy(cum[lo:hi], cnt, total, n, criterion)
    gain = proxy - parent
    valid = xs[lo:hi] < xs[lo + 1:hi + 1]
    if not valid.any():
        return -1, 0.0, 0.0
    # feature-major flattening: first maximum = lowest feature, then lowest threshold
    gain_t = np.where(valid, gain, -np.inf).T.ravel()
    flat = int(np.argmax(gain_t))
    col, pos = divmod(flat, hi - lo)
    pos += lo
    a = xs[pos, col]
    b = xs[pos + 1, col]
    thr = (a + b) / 2.0
    if not thr < b:
        thr = a
    return col, float(thr), float(gain_t[flat])


def apply_tree(X, feature, threshold, left, right):
    node = np.zeros(X.shape[0], dtype=np.intp)
    active = np.flatnonzero(left[node] >= 0)
    rows = np.arange(X.shape[0])
    while active.size:
        cur = node[active]
        go_left = X[rows[active], feature[cur]] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
        active = active[left[node[active]] >= 0]
    return node
