import numpy as np
import pytest

from conftest import encoded_split
from underest import dataset as D
from underest.classifiers import (
    ALGORITHMS,
    ClassifierError,
    ClassifierSpec,
    dumps,
    fit,
    loads,
    predict,
    predict_score,
)
from underest.classifiers import linear, mlp
from underest.classifiers.ensemble import log_loss, sigmoid

FAST = {
    "decision_tree": {"max_leaf_nodes": 10},
    "gradient_boost": {"n_trees": 10},
    "random_forest": {"n_trees": 8},
    "logistic_regression": {"epochs": 100},
    "naive_bayes": {},
    "knn": {"k": 5},
    "mlp": {"hidden_layer_sizes": [8], "epochs": 5},
}


@pytest.fixture(scope="module")
def data():
    ds = D.inject_sensitive(D.generate_synthetic(300, 4, 0.35, 2.0, seed=4), D.InjectionSpec(0.2, 0.3, 1))
    return encoded_split(ds, 0.5, seed=1)


def test_fast_table_covers_all_algorithms():
    assert set(FAST) == set(ALGORITHMS)


@pytest.mark.parametrize("algo", sorted(ALGORITHMS))
def test_scores_in_unit_interval_and_deterministic(algo, data):
    tr, te = data
    spec = ClassifierSpec(algo, FAST[algo], seed=3)
    m1 = fit(spec, tr.X, tr.y, tr.groups)
    m2 = fit(spec, tr.X, tr.y, tr.groups)
    s1, s2 = predict_score(m1, te.X), predict_score(m2, te.X)
    assert np.all((s1 >= 0) & (s1 <= 1))
    assert np.array_equal(s1, s2)
    assert set(np.unique(predict(m1, te.X))) <= {0, 1}
    assert np.array_equal(predict(m1, te.X), (s1 >= 0.5).astype(np.int8))


@pytest.mark.parametrize("algo", sorted(ALGORITHMS))
def test_serialization_roundtrip(algo, data):
    tr, te = data
    m = fit(ClassifierSpec(algo, FAST[algo], seed=1), tr.X, tr.y, tr.groups)
    back = loads(dumps(m))
    assert np.array_equal(predict_score(back, te.X), predict_score(m, te.X))
    assert back.spec == m.spec


@pytest.mark.parametrize("algo", ["logistic_regression", "naive_bayes", "knn", "decision_tree"])
def test_row_permutation_invariance(algo, data):
    tr, te = data
    perm = np.random.default_rng(0).permutation(len(tr.y))
    spec = ClassifierSpec(algo, FAST[algo])
    a = predict_score(fit(spec, tr.X, tr.y, tr.groups), te.X)
    b = predict_score(fit(spec, tr.X[perm], tr.y[perm], tr.groups), te.X)
    if algo == "decision_tree":
        # split search is order independent; only the tie order of equal
        # values can differ, which does not arise on continuous features
        assert np.array_equal(a, b)
    else:
        assert np.allclose(a, b, atol=1e-9)


def test_spec_json_roundtrip_and_validation():
    spec = ClassifierSpec("mlp", {"hidden_layer_sizes": [16, 8], "alpha": 0.1}, seed=9)
    assert ClassifierSpec.from_json(__import__("json").dumps(spec.to_dict())) == spec
    assert spec.resolved().hidden_layer_sizes == (16, 8)
    with pytest.raises(ClassifierError, match="unknown algorithm"):
        ClassifierSpec("svm")
    with pytest.raises(ClassifierError, match="unknown parameter"):
        ClassifierSpec("knn", {"kk": 3})
    for algo, bad in [("knn", {"k": 0}), ("mlp", {"alpha": -1}), ("decision_tree", {"max_leaf_nodes": 1}),
                      ("gradient_boost", {"learning_rate": 0}), ("random_forest", {"n_trees": 0}),
                      ("logistic_regression", {"l2_penalty": -0.5})]:
        with pytest.raises(ClassifierError):
            ClassifierSpec(algo, bad)
    with pytest.raises(ClassifierError, match="algorithm"):
        ClassifierSpec.from_dict({"params": {}})


def test_fit_input_errors(data):
    tr, _ = data
    with pytest.raises(ClassifierError, match="single class"):
        fit(ClassifierSpec("knn"), tr.X[:5], np.zeros(5, dtype=int))
    with pytest.raises(ClassifierError):
        fit(ClassifierSpec("knn"), tr.X[:5], np.zeros(4, dtype=int))
    m = fit(ClassifierSpec("naive_bayes"), tr.X, tr.y, tr.groups)
    with pytest.raises(ClassifierError, match="columns"):
        predict(m, tr.X[:, :2])


def test_unlimited_tree_memorizes(data):
    tr, _ = data
    m = fit(ClassifierSpec("decision_tree"), tr.X, tr.y)
    assert (predict(m, tr.X) == tr.y).mean() == 1.0


def test_tree_leaf_limit_and_monotone_training_accuracy(data):
    tr, _ = data
    accs = []
    for leaves in (2, 4, 8, 16, 30):
        m = fit(ClassifierSpec("decision_tree", {"max_leaf_nodes": leaves}), tr.X, tr.y)
        assert m.estimator.tree_.n_leaves <= leaves
        accs.append((predict(m, tr.X) == tr.y).mean())
    # best-first growth nests: a larger budget extends the smaller tree
    assert all(a <= b + 1e-12 for a, b in zip(accs, accs[1:]))


def test_knn_one_neighbour_on_training_rows(data):
    tr, _ = data
    m = fit(ClassifierSpec("knn", {"k": 1}), tr.X, tr.y)
    assert np.array_equal(predict(m, tr.X), tr.y)


def test_knn_even_vote_tie_goes_to_nearest():
    X = np.array([[0.0], [1.0], [3.0], [10.0]])
    y = np.array([1, 0, 0, 1])
    m = fit(ClassifierSpec("knn", {"k": 2}), X, y)
    # neighbours of 0.2 are rows 0 (label 1) and 1 (label 0): tie, nearest positive
    assert predict(m, np.array([[0.2]]))[0] == 1
    # neighbours of 0.9 are rows 1 (label 0) and 0 (label 1): tie, nearest negative
    assert predict(m, np.array([[0.9]]))[0] == 0


def test_naive_bayes_two_points():
    X = np.array([[0.0], [1.0]])
    m = fit(ClassifierSpec("naive_bayes"), X, np.array([0, 1]))
    assert list(predict(m, X)) == [0, 1]
    assert predict(m, np.array([[0.4]]))[0] == 0
    assert predict(m, np.array([[0.6]]))[0] == 1


def test_boosting_is_sum_of_stages(data):
    tr, te = data
    m = fit(ClassifierSpec("gradient_boost", {"n_trees": 15}), tr.X, tr.y)
    est = m.estimator
    raw = est.init_ + sum(est.params.learning_rate * t.predict_value(te.X) for t in est.trees_)
    assert np.max(np.abs(predict_score(m, te.X) - sigmoid(raw))) <= 1e-12
    assert est.init_ == pytest.approx(np.log(tr.y.mean() / (1 - tr.y.mean())))


def test_boosting_training_loss_non_increasing(data):
    tr, _ = data
    m = fit(ClassifierSpec("gradient_boost", {"n_trees": 50}), tr.X, tr.y)
    losses = [log_loss(tr.y, r) for r in m.estimator.raw_stages(tr.X)]
    assert len(losses) == 51
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_forest_votes_are_fractions(data):
    tr, te = data
    m = fit(ClassifierSpec("random_forest", {"n_trees": 7}), tr.X, tr.y)
    s = predict_score(m, te.X) * 7
    assert np.allclose(s, np.round(s))


def _central_difference_check(f, theta, coords, h=1e-6):
    _, g = f(theta)
    for j in coords:
        e = np.zeros_like(theta)
        e[j] = h
        num = (f(theta + e)[0] - f(theta - e)[0]) / (2 * h)
        denom = max(abs(num), abs(g[j]), 1e-8)
        assert abs(num - g[j]) / denom <= 1e-4, (j, num, g[j])


def test_logistic_gradient_matches_finite_differences(rng):
    X = rng.normal(size=(40, 6))
    y = (rng.random(40) < 0.4).astype(float)
    theta = rng.normal(size=7) * 0.3
    _central_difference_check(lambda t: linear.loss_and_grad(t, X, y, 2.0), theta, range(7))


def test_mlp_gradient_matches_finite_differences(rng):
    X = rng.normal(size=(30, 5))
    y = (rng.random(30) < 0.5).astype(float)
    like = mlp.init_params([5, 7, 4, 1], rng)
    theta = mlp.flatten(like)

    def f(t):
        loss, grads = mlp.loss_and_grad(mlp.unflatten(t, like), X, y, alpha=0.3)
        return loss, mlp.flatten(grads)

    coords = rng.choice(theta.size, 20, replace=False)
    _central_difference_check(f, theta, coords)


def test_mlp_weight_norm_shrinks_with_alpha(data):
    tr, _ = data
    norms = []
    for alpha in (0.0, 0.1, 10.0, 1000.0):
        m = fit(ClassifierSpec("mlp", {"hidden_layer_sizes": [16], "epochs": 20, "alpha": alpha}, seed=2),
                tr.X, tr.y)
        norms.append(mlp.weight_norm_sq(m.estimator.layers_))
    assert all(b <= a for a, b in zip(norms, norms[1:])), norms


def test_mlp_huge_alpha_is_near_constant(data):
    tr, te = data
    m = fit(ClassifierSpec("mlp", {"hidden_layer_sizes": [16], "epochs": 30, "alpha": 1e4}, seed=2),
            tr.X, tr.y)
    s = predict_score(m, te.X)
    assert s.max() - s.min() < 1e-3


def test_mlp_scores_in_range_on_random_inputs(data, rng):
    tr, _ = data
    m = fit(ClassifierSpec("mlp", {"hidden_layer_sizes": [32], "epochs": 5}), tr.X, tr.y)
    s = predict_score(m, rng.normal(scale=50.0, size=(1000, tr.X.shape[1])))
    assert s.shape == (1000,) and np.all((s >= 0) & (s <= 1))


def test_predict_commutes_with_test_row_permutation(data):
    tr, te = data
    perm = np.random.default_rng(3).permutation(len(te.y))
    for algo in sorted(ALGORITHMS):
        m = fit(ClassifierSpec(algo, FAST[algo]), tr.X, tr.y, tr.groups)
        assert np.array_equal(predict(m, te.X)[perm], predict(m, te.X[perm]))
