import numpy as np
import pytest

from eegtda.errors import InputError
from eegtda.models import (MLP, DecisionTree, LinearSVM,
                           LogisticRegressionGD, RandomForest, _gini_split)

ALL_MODELS = [LogisticRegressionGD, LinearSVM, DecisionTree, RandomForest, MLP]


def separable_blobs(seed=0, n=40, p=4, gap=4.0):
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal((n, p))
    x1 = rng.standard_normal((n, p)) + gap
    x = np.vstack([x0, x1])
    y = np.array([0] * n + [1] * n)
    perm = rng.permutation(len(y))
    return x[perm], y[perm]


def xor_data():
    x = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    x = np.repeat(x, 10, axis=0)
    y = (x[:, 0].astype(int) ^ x[:, 1].astype(int)).astype(np.int64)
    return x, y


@pytest.mark.parametrize("model_cls", ALL_MODELS)
def test_separable_blobs_perfect(model_cls):
    x, y = separable_blobs()
    model = model_cls().fit(x, y)
    assert np.array_equal(model.predict(x), y)


def test_xor_tree_exact_linear_fails():
    x, y = xor_data()
    tree = DecisionTree(max_depth=3).fit(x, y)
    assert np.array_equal(tree.predict(x), y)
    # a linear separator cannot exceed 75% on XOR
    lr = LogisticRegressionGD().fit(x, y)
    assert np.mean(lr.predict(x) == y) <= 0.75
    svm = LinearSVM().fit(x, y)
    assert np.mean(svm.predict(x) == y) <= 0.75
    forest = RandomForest(n_trees=25).fit(x, y)
    assert np.array_equal(forest.predict(x), y)
    mlp = MLP(iters=4000).fit(x, y)
    assert np.array_equal(mlp.predict(x), y)


def test_gini_split_hand_case():
    # values [1,2,3,4], labels [0,0,1,1]: perfect split at 2.5, gini 0
    res = _gini_split(np.array([1.0, 2.0, 3.0, 4.0]),
                      np.array([0, 0, 1, 1]))
    assert res is not None
    gini, thr = res
    assert gini == pytest.approx(0.0)
    assert thr == pytest.approx(2.5)


def test_gini_split_constant_feature():
    assert _gini_split(np.ones(6), np.array([0, 1, 0, 1, 0, 1])) is None


def test_mlp_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((12, 5))
    y = rng.integers(0, 2, 12).astype(np.float64)
    mlp = MLP(hidden=7, seed=3)
    flat = mlp.init_params(5) + 0.1 * rng.standard_normal(mlp.init_params(5).size)
    _, grad = mlp.loss_and_grad(flat, x, y)
    eps = 1e-6
    idx = rng.choice(flat.size, min(60, flat.size), replace=False)
    for i in idx:
        fp, fm = flat.copy(), flat.copy()
        fp[i] += eps
        fm[i] -= eps
        num = (mlp.loss_and_grad(fp, x, y)[0]
               - mlp.loss_and_grad(fm, x, y)[0]) / (2 * eps)
        assert abs(grad[i] - num) / max(abs(num), 1e-8) < 1e-4


@pytest.mark.parametrize("model_cls", ALL_MODELS)
def test_deterministic_refit(model_cls):
    x, y = separable_blobs(seed=5, gap=1.5)
    a = model_cls().fit(x, y).decision_scores(x)
    b = model_cls().fit(x, y).decision_scores(x)
    assert np.array_equal(a, b)


def test_forest_seed_changes_trees():
    x, y = separable_blobs(seed=6, gap=1.0)
    a = RandomForest(n_trees=10, seed=0).fit(x, y).predict_proba(x)
    b = RandomForest(n_trees=10, seed=1).fit(x, y).predict_proba(x)
    assert not np.array_equal(a, b)


@pytest.mark.parametrize("model_cls", ALL_MODELS)
def test_single_class_rejected(model_cls):
    x = np.random.default_rng(0).standard_normal((10, 3))
    with pytest.raises(InputError):
        model_cls().fit(x, np.zeros(10, dtype=int))


def test_nonfinite_rejected():
    x = np.zeros((4, 2))
    x[0, 0] = np.nan
    with pytest.raises(InputError):
        LogisticRegressionGD().fit(x, np.array([0, 1, 0, 1]))


def test_noisy_blobs_generalize():
    x, y = separable_blobs(seed=7, n=60, gap=2.5)
    x_test, y_test = separable_blobs(seed=8, n=30, gap=2.5)
    for model_cls in ALL_MODELS:
        model = model_cls().fit(x, y)
        assert np.mean(model.predict(x_test) == y_test) >= 0.9
