"""L2-regularized logistic regression by full-batch gradient descent."""
from __future__ import annotations

import numpy as np

from underest.classifiers.ensemble import sigmoid


def loss_and_grad(theta, X, y, l2):
    """Objective and gradient for ``theta = [w..., b]``.

    Objective: mean cross-entropy + ``l2 / (2 n) * |w|^2``; the intercept is
    not penalized.
    """
    n = len(y)
    w, b = theta[:-1], theta[-1]
    z = X @ w + b
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 / n * (w @ w)
    err = (sigmoid(z) - y) / n
    grad = np.empty_like(theta)
    grad[:-1] = X.T @ err + l2 / n * w
    grad[-1] = err.sum()
    return float(loss), grad


class LogisticRegression:
    def __init__(self, params, seed):
        self.params = params
        self.seed = seed

    def fit(self, X, y, groups=None):
        p = self.params
        y = np.asarray(y, dtype=np.float64)
        theta = np.zeros(X.shape[1] + 1)
        for _ in range(p.epochs):
            _, g = loss_and_grad(theta, X, y, p.l2_penalty)
            theta -= p.learning_rate * g
        self.coef_ = theta[:-1].copy()
        self.intercept_ = float(theta[-1])
        return self

    def score(self, X):
        return sigmoid(X @ self.coef_ + self.intercept_)
