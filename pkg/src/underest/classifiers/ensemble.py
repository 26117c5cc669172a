"""Tree ensembles: stagewise logistic boosting and bagged random forests."""
from __future__ import annotations

import math

import numpy as np

from underest.classifiers.tree import GINI, SSE, grow_tree


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_loss(y, raw):
    """Mean logistic loss of raw scores ``raw`` against 0/1 labels."""
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, raw) - y * raw))


class GradientBoost:
    """Stagewise additive logistic model.

    Starts from the log-odds of the positive base rate. Each stage grows a
    least-squares regression tree on the residuals ``y - p``; leaves then take
    the one-step Newton value ``sum(r) / sum(p(1-p))`` and the stage is added
    scaled by the learning rate.
    """

    def __init__(self, params, seed):
        self.params = params
        self.seed = seed

    def fit(self, X, y, groups=None):
        p = self.params
        y = np.asarray(y, dtype=np.float64)
        base = y.mean()
        self.init_ = math.log(base / (1.0 - base))
        raw = np.full(len(y), self.init_)
        trees = []
        for _ in range(p.n_trees):
            prob = sigmoid(raw)
            resid = y - prob
            tree = grow_tree(X, resid, SSE, p.max_leaf_nodes, p.min_samples_leaf)
            leaf = tree.apply(X)
            num = np.bincount(leaf, weights=resid, minlength=tree.n_nodes)
            den = np.bincount(leaf, weights=prob * (1.0 - prob), minlength=tree.n_nodes)
            step = np.divide(num, den, out=np.zeros_like(num), where=den > 1e-150)
            tree = tree.with_values(step)
            raw = raw + p.learning_rate * step[leaf]
            trees.append(tree)
        self.trees_ = tuple(trees)
        return self

    def raw_stages(self, X):
        """Yield the raw score after each stage (stage 0 is the constant start)."""
        raw = np.full(len(X), self.init_)
        yield raw
        for tree in self.trees_:
            raw = raw + self.params.learning_rate * tree.predict_value(X)
            yield raw

    def raw_score(self, X):
        raw = np.full(len(X), self.init_)
        for tree in self.trees_:
            raw = raw + self.params.learning_rate * tree.predict_value(X)
        return raw

    def score(self, X):
        return sigmoid(self.raw_score(X))


class RandomForest:
    """Bagged unlimited Gini trees with per-split feature sampling; majority vote."""

    def __init__(self, params, seed):
        self.params = params
        self.seed = seed

    def fit(self, X, y, groups=None):
        p = self.params
        n, d = X.shape
        k = p.features_per_split or max(1, int(math.sqrt(d)))
        trees = []
        for t in range(p.n_trees):
            # per-tree streams: results do not depend on build order
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, t]))
            idx = rng.integers(0, n, n) if p.bootstrap else np.arange(n)
            trees.append(grow_tree(X[idx], y[idx], GINI, None, p.min_samples_leaf,
                                   max_features=k, rng=rng))
        self.trees_ = tuple(trees)
        return self

    def score(self, X):
        votes = np.zeros(len(X))
        for tree in self.trees_:
            votes += tree.predict_value(X) >= 0.5
        return votes / len(self.trees_)
