"""Best-first CART trees on a dense design matrix.

Growth repeatedly splits the frontier leaf whose best split yields the
largest impurity decrease, until the leaf budget is reached or no split
improves. Ties between leaves go to the earlier-created leaf; ties within a
leaf go to the lowest feature index, then the lowest threshold.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from underest import kernels
from underest.kernels import GINI, SSE

__all__ = ["Tree", "grow_tree", "GINI", "SSE"]

# splits must improve impurity by more than this (count units)
MIN_GAIN = 1e-12


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.left)

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.left < 0))

    def apply(self, X) -> np.ndarray:
        return kernels.apply_tree(X, self.feature, self.threshold, self.left, self.right)

    def predict_value(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def with_values(self, value) -> "Tree":
        value = np.asarray(value, dtype=np.float64)
        value.flags.writeable = False
        return Tree(self.feature, self.threshold, self.left, self.right, value, self.n_samples)


def grow_tree(X, target, criterion=GINI, max_leaf_nodes=None, min_samples_leaf=1,
              max_features=None, rng=None) -> Tree:
    """Grow a binary tree on ``X`` fitting ``target``.

    ``criterion`` is ``GINI`` for 0/1 targets or ``SSE`` for real targets.
    Leaf values are target means. With ``max_features`` set, each node
    considers a fresh random subset of that many columns drawn from ``rng``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    target = np.ascontiguousarray(target, dtype=np.float64)
    n, d = X.shape
    if max_features is not None and max_features >= d:
        max_features = None
    all_features = np.arange(d)

    feature, threshold, left, right, value, count = [], [], [], [], [], []
    frontier = []

    def new_node(idx):
        nid = len(left)
        t = target[idx]
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(t.mean()))
        count.append(len(idx))
        if max_features is None:
            feats = all_features
        else:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        if len(idx) < 2 * min_samples_leaf or t.min() == t.max():
            return nid
        sub = X[np.ix_(idx, feats)]
        order = np.argsort(sub, axis=0, kind="stable")
        col, thr, gain = kernels.best_split(sub, order, t, min_samples_leaf, criterion)
        if col >= 0 and gain > MIN_GAIN:
            heapq.heappush(frontier, (-gain, nid, int(feats[col]), thr, idx))
        return nid

    new_node(np.arange(n))
    n_leaves = 1
    while frontier and (max_leaf_nodes is None or n_leaves < max_leaf_nodes):
        _, nid, f, thr, idx = heapq.heappop(frontier)
        go_left = X[idx, f] <= thr
        lid = new_node(idx[go_left])
        rid = new_node(idx[~go_left])
        feature[nid], threshold[nid], left[nid], right[nid] = f, thr, lid, rid
        n_leaves += 1

    arrays = [np.asarray(feature, dtype=np.intp), np.asarray(threshold, dtype=np.float64),
              np.asarray(left, dtype=np.intp), np.asarray(right, dtype=np.intp),
              np.asarray(value, dtype=np.float64), np.asarray(count, dtype=np.intp)]
    for a in arrays:
        a.flags.writeable = False
    return Tree(*arrays)


class DecisionTree:
    def __init__(self, params, seed):
        self.params = params
        self.seed = seed

    def fit(self, X, y, groups=None):
        p = self.params
        self.tree_ = grow_tree(X, y, GINI, p.max_leaf_nodes, p.min_samples_leaf)
        return self

    def score(self, X):
        return self.tree_.predict_value(X)
