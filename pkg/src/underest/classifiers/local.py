"""Naive Bayes and k-nearest-neighbour classifiers."""
from __future__ import annotations

import numpy as np

from underest.classifiers.ensemble import sigmoid


class NaiveBayes:
    """Gaussian likelihoods for numeric columns, add-one smoothed categorical
    likelihoods for one-hot blocks (``groups``), frequency class priors."""

    # relative variance floor, as a fraction of the largest feature variance
    VAR_SMOOTHING = 1e-9

    def __init__(self, params, seed):
        self.params = params
        self.seed = seed

    def fit(self, X, y, groups=None):
        y = np.asarray(y)
        groups = [list(g) for g in (groups or [])]
        in_group = {j for g in groups for j in g}
        self.numeric_ = np.array([j for j in range(X.shape[1]) if j not in in_group], dtype=np.intp)
        self.groups_ = groups
        eps = max(self.VAR_SMOOTHING * float(X.var(axis=0).max(initial=0.0)), 1e-12)
        self.log_prior_, self.mean_, self.var_, self.cat_logp_ = [], [], [], []
        for c in (0, 1):
            Xc = X[y == c]
            self.log_prior_.append(np.log(len(Xc) / len(X)))
            num = Xc[:, self.numeric_]
            self.mean_.append(num.mean(axis=0))
            self.var_.append(num.var(axis=0) + eps)
            tables = []
            for g in groups:
                counts = Xc[:, g].sum(axis=0)
                tables.append(np.log((counts + 1.0) / (len(Xc) + len(g))))
            self.cat_logp_.append(tables)
        return self

    def _joint(self, X, c):
        num = X[:, self.numeric_]
        mu, var = self.mean_[c], self.var_[c]
        ll = -0.5 * np.sum(np.log(2 * np.pi * var) + (num - mu) ** 2 / var, axis=1)
        for g, table in zip(self.groups_, self.cat_logp_[c]):
            block = X[:, g]
            # rows whose category was unseen at encode time carry no evidence
            seen = block.max(axis=1) > 0
            ll = ll + np.where(seen, table[np.argmax(block, axis=1)], 0.0)
        return ll + self.log_prior_[c]

    def score(self, X):
        return sigmoid(self._joint(X, 1) - self._joint(X, 0))


class KNN:
    """Euclidean k-nearest-neighbour vote.

    Equidistant neighbours are ranked by training-row order. An exactly split
    vote (even ``k``) goes to the class of the single nearest neighbour.
    """

    CHUNK = 256

    def __init__(self, params, seed):
        self.params = params
        self.seed = seed

    def fit(self, X, y, groups=None):
        if self.params.k > len(X):
            raise ValueError(f"k={self.params.k} exceeds training-set size {len(X)}")
        self.X_ = np.array(X, dtype=np.float64)
        self.y_ = np.asarray(y, dtype=np.float64)
        return self

    def neighbours(self, X):
        """Indices of the ``k`` nearest training rows, nearest first."""
        k = self.params.k
        out = np.empty((len(X), k), dtype=np.intp)
        for start in range(0, len(X), self.CHUNK):
            q = X[start:start + self.CHUNK]
            d2 = ((q[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
            if k < d2.shape[1]:
                kth = np.partition(d2, k - 1, axis=1)[:, k - 1:k]
                # keep everything at or inside the k-th distance, then rank by
                # (distance, training index)
                cand = d2 <= kth
                for r in range(len(q)):
                    idx = np.flatnonzero(cand[r])
                    idx = idx[np.argsort(d2[r, idx], kind="stable")]
                    out[start + r] = idx[:k]
            else:
                out[start:start + len(q)] = np.argsort(d2, axis=1, kind="stable")[:, :k]
        return out

    def score(self, X):
        nb = self.neighbours(X)
        votes = self.y_[nb]
        s = votes.mean(axis=1)
        tie = s == 0.5
        if tie.any():
            s[tie & (votes[:, 0] == 0)] = np.nextafter(0.5, 0.0)
        return s
