"""From-scratch binary classifiers behind one fit / predict contract.

>>> spec = ClassifierSpec("decision_tree", {"max_leaf_nodes": 30}, seed=0)
>>> model = fit(spec, X_train, y_train)          # doctest: +SKIP
>>> y_hat = predict(model, X_test)               # doctest: +SKIP

Every algorithm exposes one capacity / regularization control used in the
underfitting experiments: leaf budget (trees), number of stages (boosting),
L2 strength (logistic regression, MLP) and ``k`` (kNN).
"""
from __future__ import annotations

import dataclasses
import json
import pickle
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from underest.classifiers.ensemble import GradientBoost, RandomForest
from underest.classifiers.linear import LogisticRegression
from underest.classifiers.local import KNN, NaiveBayes
from underest.classifiers.mlp import MLP
from underest.classifiers.tree import DecisionTree


class ClassifierError(ValueError):
    pass


def _require(cond, msg):
    if not cond:
        raise ClassifierError(msg)


@dataclass(frozen=True)
class TreeParams:
    max_leaf_nodes: int | None = None
    min_samples_leaf: int = 1

    def __post_init__(self):
        _require(self.max_leaf_nodes is None or self.max_leaf_nodes >= 2,
                 "max_leaf_nodes must be >= 2 or null (unlimited)")
        _require(self.min_samples_leaf >= 1, "min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class BoostParams:
    n_trees: int = 100
    learning_rate: float = 0.1
    max_leaf_nodes: int = 8
    min_samples_leaf: int = 1

    def __post_init__(self):
        _require(self.n_trees >= 1, "n_trees must be >= 1")
        _require(self.learning_rate > 0, "learning_rate must be > 0")
        _require(self.max_leaf_nodes >= 2, "max_leaf_nodes must be >= 2")
        _require(self.min_samples_leaf >= 1, "min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    features_per_split: int | None = None  # None: int(sqrt(d))
    bootstrap: bool = True
    min_samples_leaf: int = 1

    def __post_init__(self):
        _require(self.n_trees >= 1, "n_trees must be >= 1")
        _require(self.features_per_split is None or self.features_per_split >= 1,
                 "features_per_split must be >= 1 or null")
        _require(self.min_samples_leaf >= 1, "min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class LinearParams:
    learning_rate: float = 0.5
    epochs: int = 1000
    l2_penalty: float = 1.0

    def __post_init__(self):
        _require(self.learning_rate > 0, "learning_rate must be > 0")
        _require(self.epochs >= 1, "epochs must be >= 1")
        _require(self.l2_penalty >= 0, "l2_penalty must be >= 0")


@dataclass(frozen=True)
class NaiveBayesParams:
    pass


@dataclass(frozen=True)
class KnnParams:
    k: int = 5

    def __post_init__(self):
        _require(self.k >= 1, "k must be >= 1")


@dataclass(frozen=True)
class MlpParams:
    hidden_layer_sizes: tuple[int, ...] = (100,)
    alpha: float = 1e-4
    learning_rate: float = 0.01
    epochs: int = 200
    batch_size: int = 32

    def __post_init__(self):
        object.__setattr__(self, "hidden_layer_sizes", tuple(int(h) for h in self.hidden_layer_sizes))
        _require(all(h >= 1 for h in self.hidden_layer_sizes), "every hidden size must be >= 1")
        _require(self.alpha >= 0, "alpha must be >= 0")
        _require(self.learning_rate > 0, "learning_rate must be > 0")
        _require(self.epochs >= 1, "epochs must be >= 1")
        _require(self.batch_size >= 1, "batch_size must be >= 1")


ALGORITHMS = {
    "decision_tree": (TreeParams, DecisionTree),
    "gradient_boost": (BoostParams, GradientBoost),
    "random_forest": (ForestParams, RandomForest),
    "logistic_regression": (LinearParams, LogisticRegression),
    "naive_bayes": (NaiveBayesParams, NaiveBayes),
    "knn": (KnnParams, KNN),
    "mlp": (MlpParams, MLP),
}


@dataclass(frozen=True)
class ClassifierSpec:
    """Algorithm name, hyperparameter overrides and seed.

    ``params`` holds only the overrides; missing entries take the algorithm
    defaults. Unknown names are rejected.
    """

    algorithm: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ClassifierError(
                f"unknown algorithm {self.algorithm!r}; expected one of {sorted(ALGORITHMS)}")
        object.__setattr__(self, "params", dict(self.params))
        self.resolved()

    def resolved(self):
        cls = ALGORITHMS[self.algorithm][0]
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(self.params) - names
        if unknown:
            raise ClassifierError(f"{self.algorithm}: unknown parameter(s) {sorted(unknown)}")
        try:
            return cls(**self.params)
        except TypeError as exc:
            raise ClassifierError(f"{self.algorithm}: {exc}") from None

    def with_params(self, **changes) -> "ClassifierSpec":
        return ClassifierSpec(self.algorithm, {**self.params, **changes}, self.seed)

    def with_seed(self, seed: int) -> "ClassifierSpec":
        return ClassifierSpec(self.algorithm, self.params, seed)

    @property
    def label(self) -> str:
        if not self.params:
            return self.algorithm
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.algorithm}({inner})"

    def to_dict(self) -> dict:
        params = {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()}
        return {"algorithm": self.algorithm, "params": params, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ClassifierSpec":
        if "algorithm" not in d:
            raise ClassifierError("classifier spec is missing field 'algorithm'")
        return cls(d["algorithm"], d.get("params") or {}, int(d.get("seed", 0)))

    @classmethod
    def from_json(cls, text: str) -> "ClassifierSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class TrainedModel:
    spec: ClassifierSpec
    n_features: int
    estimator: Any


def fit(spec: ClassifierSpec, X, y, groups=None) -> TrainedModel:
    """Train ``spec`` on design matrix ``X`` and 0/1 labels ``y``.

    ``groups`` lists the column blocks of one-hot encoded categoricals; only
    naive Bayes uses it.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ClassifierError(f"X has {len(X)} rows but y has {len(y)} labels")
    if len(y) < 2:
        raise ClassifierError("need at least 2 training rows")
    if not np.isin(y, (0, 1)).all():
        raise ClassifierError("labels must be 0/1")
    if len(np.unique(y)) < 2:
        raise ClassifierError("training labels contain a single class")
    params = spec.resolved()
    est = ALGORITHMS[spec.algorithm][1](params, spec.seed)
    try:
        est.fit(X, y.astype(np.int8), groups=groups)
    except ValueError as exc:
        raise ClassifierError(str(exc)) from None
    return TrainedModel(spec, X.shape[1], est)


def _check_X(model, X):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ClassifierError(
            f"expected {model.n_features} columns, got {X.shape[1] if X.ndim == 2 else X.shape}")
    return X


def predict_score(model: TrainedModel, X) -> np.ndarray:
    """Positive-class probability estimate per row, in [0, 1]."""
    return np.clip(model.estimator.score(_check_X(model, X)), 0.0, 1.0)


def predict(model: TrainedModel, X) -> np.ndarray:
    """Hard 0/1 decisions: 1 iff the score is at least 0.5."""
    return (predict_score(model, X) >= 0.5).astype(np.int8)


FORMAT_VERSION = 1


def dumps(model: TrainedModel) -> bytes:
    """Opaque serialized form; only readable by the same format version."""
    return pickle.dumps({"format": FORMAT_VERSION, "model": model})


def loads(blob: bytes) -> TrainedModel:
    obj = pickle.loads(blob)
    if not isinstance(obj, dict) or obj.get("format") != FORMAT_VERSION:
        raise ClassifierError("unsupported serialized model format")
    return obj["model"]


__all__ = [
    "ALGORITHMS", "BoostParams", "ClassifierError", "ClassifierSpec", "ForestParams",
    "KnnParams", "LinearParams", "MlpParams", "NaiveBayesParams", "TrainedModel",
    "TreeParams", "dumps", "fit", "loads", "predict", "predict_score",
]
