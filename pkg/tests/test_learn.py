import itertools
import json
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commsmell.features import dataset_from_arrays
from commsmell.learn import (
    ClassifierSpec,
    DecisionTree,
    GaussianNaiveBayes,
    LogisticRegression,
    RandomForest,
    compute_metrics,
    cross_validate,
    evaluate_cross_project,
    evaluate_within_project,
    grid_points,
    grid_search,
    reports_to_csv,
    roc_auc,
    stratified_folds,
    train_classifier,
)


def gini_impurity(y_left, y_right):
    """Exact n * weighted Gini of a split, as a Fraction."""
    total = Fraction(0)
    for side in (y_left, y_right):
        n, p = len(side), sum(side)
        total += Fraction(2 * p * (n - p), n)
    return total


def brute_force_split(X, y):
    """All (feature, midpoint) candidates, scored exactly."""
    best = None
    for f in range(X.shape[1]):
        values = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(values, values[1:]):
            thr = lo + (hi - lo) / 2
            left = [int(t) for x, t in zip(X[:, f], y) if x <= thr]
            right = [int(t) for x, t in zip(X[:, f], y) if x > thr]
            score = gini_impurity(left, right)
            if best is None or score < best[0]:
                best = (score, f, thr)
    return best


def test_depth_one_tree_reproduces_threshold():
    x = np.array([[0.5], [1.0], [2.0], [3.5], [4.0], [6.0]])
    y = np.array([0, 0, 0, 1, 1, 1])
    tree = DecisionTree(max_depth=1).fit(x, y)
    score, f, thr = brute_force_split(x, y)
    assert (tree.feature_[0], tree.threshold_[0]) == (f, thr) == (0, 2.75)
    assert score == 0 and tree.depth == 1


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**6))
def test_root_split_is_gini_optimal(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(4, 25)), int(rng.integers(1, 4))
    X = rng.integers(0, 6, size=(n, d)).astype(float)
    y = rng.integers(0, 2, size=n)
    if len(set(y)) < 2 or all(len(set(X[:, j])) < 2 for j in range(d)):
        return
    tree = DecisionTree(max_depth=1).fit(X, y)
    best = brute_force_split(X, y)
    f, thr = tree.feature_[0], tree.threshold_[0]
    mask = X[:, f] <= thr
    chosen = gini_impurity(y[mask].tolist(), y[~mask].tolist())
    assert chosen == best[0]


def test_tree_respects_limits():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 3))
    y = (X[:, 0] * X[:, 1] > 0).astype(int)
    assert DecisionTree(max_depth=3).fit(X, y).depth <= 3
    tree = DecisionTree(min_samples_leaf=10).fit(X, y)
    leaves = tree.apply(X)
    assert np.bincount(leaves)[np.unique(leaves)].min() >= 10
    assert np.array_equal(DecisionTree().fit(X, y).predict_proba(X), y)


def test_forest_with_one_full_tree_equals_tree():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(80, 5))
    y = (X[:, 0] + X[:, 2] ** 2 > 0.5).astype(int)
    test = rng.normal(size=(50, 5))
    forest = RandomForest(n_trees=1, max_features=None, bootstrap=False, seed=9).fit(X, y)
    tree = DecisionTree().fit(X, y)
    assert np.array_equal(forest.predict_proba(test), tree.predict_proba(test))


def test_forest_determinism_and_subset_size():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(60, 9))
    y = (X[:, 0] > 0).astype(int)
    test = rng.normal(size=(30, 9))
    a = train_classifier(ClassifierSpec("random_forest", {"n_trees": 15}, 5), X, y)
    b = train_classifier(ClassifierSpec("random_forest", {"n_trees": 15}, 5), X, y)
    assert np.array_equal(a.predict_proba(test), b.predict_proba(test))
    c = train_classifier(ClassifierSpec("random_forest", {"n_trees": 15}, 6), X, y)
    assert not np.array_equal(a.predict_proba(test), c.predict_proba(test))


def test_logistic_separable():
    X = np.array([[0, 0], [1, 0], [0, 1], [3, 3], [4, 3], [3, 4]], dtype=float)
    y = np.array([0, 0, 0, 1, 1, 1])
    model = train_classifier(ClassifierSpec("logistic_regression", {"l2": 0.0}), X, y)
    assert (model.predict(X) == y).all()


def test_logistic_converges_to_stationary_point():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(300, 3))
    y = (X @ [1.0, -2.0, 0.5] + rng.logistic(size=300) > 0).astype(int)
    lr = LogisticRegression(l2=0.1).fit(X, y)
    assert lr.n_iter_ < 10_000
    Z = (X - lr.mean_) / lr.scale_
    w = np.r_[lr.coef_ * lr.scale_, lr.intercept_ + lr.coef_ @ lr.mean_]
    p = 1 / (1 + np.exp(-(np.c_[Z, np.ones(300)] @ w)))
    grad = np.c_[Z, np.ones(300)].T @ (p - y) / 300 + np.r_[0.1 * w[:-1], 0.0]
    assert np.abs(grad).max() < 1e-6


def test_naive_bayes_matches_closed_form():
    rng = np.random.default_rng(2)
    X = np.r_[rng.normal(0, 1, size=(40, 2)), rng.normal(2, 0.5, size=(20, 2))]
    y = np.r_[np.zeros(40, int), np.ones(20, int)]
    nb = GaussianNaiveBayes().fit(X, y)
    x = np.array([[1.0, 1.5]])

    def density(c):
        xc = X[y == c]
        mu, var = xc.mean(0), xc.var(0)
        return np.prod(np.exp(-(x - mu) ** 2 / (2 * var)) / np.sqrt(2 * np.pi * var)) * len(xc) / len(X)

    assert nb.predict_proba(x)[0] == pytest.approx(density(1) / (density(0) + density(1)), rel=1e-10)


def test_naive_bayes_variance_floor():
    X = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 5.0], [1.0, 6.0]])
    p = GaussianNaiveBayes().fit(X, [0, 0, 1, 1]).predict_proba(X)
    assert np.isfinite(p).all() and (np.round(p) == [0, 0, 1, 1]).all()


def test_training_errors():
    with pytest.raises(ValueError, match="single class"):
        train_classifier(ClassifierSpec("decision_tree"), [[0], [1]], [1, 1])
    model = train_classifier(ClassifierSpec("decision_tree"), [[0, 1], [1, 0]], [0, 1], ["A", "B"])
    with pytest.raises(ValueError, match="2 features"):
        model.predict([[0, 1, 2]])
    with pytest.raises(ValueError):
        ClassifierSpec("svm")
    with pytest.raises(ValueError):
        ClassifierSpec("decision_tree", {"n_trees": 3})


# -- metrics ---------------------------------------------------------------------

def test_perfect_metrics():
    m = compute_metrics([0, 1, 1, 0], [0, 1, 1, 0], [0.1, 0.9, 0.8, 0.2])
    assert (m.precision, m.recall, m.f_measure, m.auc) == (1, 1, 1, 1)


def test_constant_scores_auc_half():
    assert roc_auc([0, 1, 1, 0], [0.3] * 4) == 0.5


def test_auc_pair_example():
    assert roc_auc([1, 1, 0, 0], [0.9, 0.4, 0.6, 0.1]) == 0.75


def test_hand_confusion_matrix():
    m = compute_metrics([1, 1, 1, 0, 0, 0], [1, 1, 0, 0, 0, 1])
    assert m.precision == pytest.approx(2 / 3) and m.recall == pytest.approx(2 / 3)
    assert m.f_measure == pytest.approx(2 / 3)
    # imbalanced: class 1 support 1, class 0 support 3
    m = compute_metrics([1, 0, 0, 0], [1, 1, 0, 0])
    # class 1: P=1/2, R=1, F=2/3; class 0: P=1, R=2/3, F=4/5
    assert m.precision == pytest.approx(0.25 * 0.5 + 0.75 * 1)
    assert m.recall == pytest.approx(0.25 * 1 + 0.75 * 2 / 3)
    assert m.f_measure == pytest.approx(0.25 * 2 / 3 + 0.75 * 0.8)


def test_zero_division_defined():
    m = compute_metrics([1, 1], [0, 0])
    assert m.precision == m.recall == m.f_measure == 0 and m.zero_division >= 1
    with pytest.raises(ValueError):
        compute_metrics([], [])


def pair_auc(truth, scores):
    pos = [s for t, s in zip(truth, scores) if t == 1]
    neg = [s for t, s in zip(truth, scores) if t == 0]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 6)), min_size=2, max_size=25))
def test_auc_equals_pair_enumeration_and_metric_bounds(data):
    truth = [t for t, _ in data]
    scores = [s / 6 for _, s in data]
    preds = [int(s > 0.5) for s in scores]
    m = compute_metrics(truth, preds, scores)
    if 0 < sum(truth) < len(truth):
        assert m.auc == pytest.approx(pair_auc(truth, scores), abs=1e-12)
        # strictly monotone transform leaves AUC unchanged
        assert roc_auc(truth, np.exp(3 * np.array(scores)) - 7) == pytest.approx(m.auc, abs=1e-12)
    for v in (m.precision, m.recall, m.f_measure, m.auc):
        assert 0 <= v <= 1


# -- validation -------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(1, 40), st.integers(2, 10), st.integers(0, 1000))
def test_stratified_folds_balanced(n_pos, n_neg, k, seed):
    y = np.r_[np.ones(n_pos, int), np.zeros(n_neg, int)]
    folds = stratified_folds(y, k, np.random.default_rng(seed))
    assert sorted(np.concatenate(folds).tolist()) == list(range(len(y)))
    for c in (0, 1):
        counts = [int((y[f] == c).sum()) for f in folds]
        assert max(counts) - min(counts) <= 1


def separable(n=40, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    y = (X[:, 0] > 0).astype(int)
    X[:, 0] += np.where(y == 1, 2.0, -2.0)
    return X, y


def test_grid_singleton():
    X, y = separable()
    spec = grid_search("decision_tree", {"max_depth": [2]}, X, y, seed=1)
    assert spec.hyper_parameters == {"max_depth": 2}


def test_grid_prefers_depth_for_interaction():
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, size=(120, 2))
    y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(int)
    grid = {"max_depth": [1, 3]}
    spec = grid_search("decision_tree", grid, X, y, seed=2)
    assert spec.hyper_parameters == {"max_depth": 3}
    # hand-run CV with the same folds gives the same ranking
    scores = [np.mean([r["f_measure"] for r in cross_validate(ClassifierSpec("decision_tree", hp, 2), X, y, 10, 2)])
              for hp in grid_points("decision_tree", grid)]
    assert scores[1] > scores[0]
    assert grid_search("decision_tree", grid, X, y, seed=2) == spec


def test_grid_ties_go_to_first_point():
    X, y = separable()
    spec = grid_search("decision_tree", {"max_depth": [5, 3, 10]}, X, y, seed=0)
    assert spec.hyper_parameters == {"max_depth": 5}


def test_grid_small_data_warns():
    X, y = separable(6)
    with pytest.warns(UserWarning, match="6 folds"):
        grid_search("gaussian_naive_bayes", None, X, y, seed=0)


def test_default_grids():
    assert len(grid_points("decision_tree")) == 12
    assert grid_points("random_forest") == [{"n_trees": 10}, {"n_trees": 50}, {"n_trees": 100}]
    assert grid_points("gaussian_naive_bayes") == [{}]


def test_cross_project_separable_and_deterministic():
    X, y = separable(60)
    ds = dataset_from_arrays(np.c_[X, np.zeros((60, 15))], {"silo": y})
    spec = ClassifierSpec("random_forest", {"n_trees": 10}, 3)
    rep = evaluate_cross_project(ds, "silo", spec, seed=4)
    assert rep.medians["f_measure"] == 1.0
    assert len(rep.folds) == 100
    again = evaluate_cross_project(ds, "silo", spec, seed=4)
    assert rep.to_json() == again.to_json()
    assert reports_to_csv([rep]) == reports_to_csv([again])
    with pytest.raises(ValueError, match="bottleneck"):
        evaluate_cross_project(ds, "bottleneck", spec, seed=4)


def test_within_project_loocv():
    X = np.array([[0.0], [0.1], [5.0], [5.1]])
    ds = dataset_from_arrays(np.c_[X, np.zeros((4, 17))], {"lone_wolf": [0, 0, 1, 1]})
    rep = evaluate_within_project(ds, "lone_wolf", ClassifierSpec("decision_tree"))
    assert rep.medians["f_measure"] == 1.0
    assert len(rep.predictions) == 4


def test_within_project_hand_confusion():
    X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0], [1.5]])
    y = np.array([0, 0, 0, 1, 1, 1])
    ds = dataset_from_arrays(np.c_[X, np.zeros((6, 17))], {"lone_wolf": y})
    spec = ClassifierSpec("decision_tree", {"max_depth": 1})
    rep = evaluate_within_project(ds, "lone_wolf", spec)
    preds = []
    for i in range(6):
        train = [j for j in range(6) if j != i]
        preds.append(int(train_classifier(spec, ds.matrix()[train], y[train]).predict(ds.matrix()[i:i + 1])[0]))
    tp = sum(p == t == 1 for p, t in zip(preds, y))
    tn = sum(p == t == 0 for p, t in zip(preds, y))
    fp = sum(p == 1 and t == 0 for p, t in zip(preds, y))
    fn = sum(p == 0 and t == 1 for p, t in zip(preds, y))
    p1, r1 = tp / (tp + fp), tp / (tp + fn)
    p0, r0 = tn / (tn + fn), tn / (tn + fp)
    assert rep.folds[0]["precision"] == pytest.approx((p0 + p1) / 2)
    assert rep.folds[0]["recall"] == pytest.approx((r0 + r1) / 2)
    with pytest.raises(ValueError):
        evaluate_within_project(ds.subset([0]), "lone_wolf", spec)
