"""Fully connected ReLU network with a logistic output unit.

Training minimizes mean cross-entropy plus ``alpha / (2 n) * sum(W**2)`` over
the weight matrices (biases are not penalized), with ``n`` the training-set
size. Optimization is seeded mini-batch SGD; the L2 term is applied as an
exact proximal shrink after each data-gradient step, which has the same fixed
points as the plain gradient step and stays stable for very large ``alpha``.
"""
from __future__ import annotations

import math

import numpy as np

from underest.classifiers.ensemble import sigmoid


def init_params(sizes, rng):
    """Uniform(-b, b) weights with ``b = sqrt(6 / fan_in)``; zero biases."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = math.sqrt(6.0 / fan_in)
        params.append((rng.uniform(-bound, bound, (fan_in, fan_out)), np.zeros(fan_out)))
    return params


def forward(params, X):
    """Return the output logits and the list of layer activations."""
    acts = [X]
    h = X
    for W, b in params[:-1]:
        h = np.maximum(h @ W + b, 0.0)
        acts.append(h)
    W, b = params[-1]
    return (h @ W + b)[:, 0], acts


def data_grad(params, X, y):
    """Mean cross-entropy and its gradient, without the penalty."""
    z, acts = forward(params, X)
    m = len(y)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    delta = ((sigmoid(z) - y) / m)[:, None]
    grads = [None] * len(params)
    for i in range(len(params) - 1, -1, -1):
        W, _ = params[i]
        h = acts[i]
        grads[i] = (h.T @ delta, delta.sum(axis=0))
        if i:
            delta = (delta @ W.T) * (h > 0)
    return loss, grads


def loss_and_grad(params, X, y, alpha, n_total=None):
    """Full objective and gradient (the penalty scale uses ``n_total``)."""
    n_total = len(y) if n_total is None else n_total
    loss, grads = data_grad(params, X, y)
    c = alpha / n_total
    loss += 0.5 * c * sum(float(np.sum(W * W)) for W, _ in params)
    return loss, [(gW + c * W, gb) for (W, _), (gW, gb) in zip(params, grads)]


def flatten(params):
    return np.concatenate([np.concatenate([W.ravel(), b]) for W, b in params])


def unflatten(theta, like):
    out, k = [], 0
    for W, b in like:
        w = theta[k:k + W.size].reshape(W.shape)
        k += W.size
        out.append((w, theta[k:k + b.size]))
        k += b.size
    return out


def weight_norm_sq(params) -> float:
    return float(sum(np.sum(W * W) for W, _ in params))


class MLP:
    def __init__(self, params, seed):
        self.params = params
        self.seed = seed

    def fit(self, X, y, groups=None):
        p = self.params
        y = np.asarray(y, dtype=np.float64)
        n, d = X.shape
        rng = np.random.default_rng(self.seed)
        layers = init_params([d, *p.hidden_layer_sizes, 1], rng)
        lr = p.learning_rate
        shrink = 1.0 / (1.0 + lr * p.alpha / n)
        bs = min(p.batch_size, n)
        for _ in range(p.epochs):
            perm = rng.permutation(n)
            for start in range(0, n, bs):
                idx = perm[start:start + bs]
                _, grads = data_grad(layers, X[idx], y[idx])
                layers = [((W - lr * gW) * shrink, b - lr * gb)
                          for (W, b), (gW, gb) in zip(layers, grads)]
        self.layers_ = tuple(layers)
        return self

    def score(self, X):
        z, _ = forward(self.layers_, X)
        return sigmoid(z)
