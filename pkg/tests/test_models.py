import pickle
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from vivikit.models import (KNearestNeighbors, RandomForest, SchemaError, dump_model,
                            embedded_importance, forest_fit, knn_fit, load_model, predict)
from vivikit.simbench import SimConfig, friedman
from vivikit.tabular import Column, NUMERIC, Table

from conftest import uniform_table


@pytest.fixture(scope="module")
def friedman_fit():
    t = friedman(SimConfig(n=500, p=10, seed=5))
    return t, RandomForest(n_trees=60, seed=1).fit(t)


def class_table(n=120, seed=0, k=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    labels = np.array(["a", "b", "c"][:k])[(X[:, 0] > 0).astype(int) + (X[:, 1] > 0.5) * (k - 2)]
    return Table((Column("u", NUMERIC, X[:, 0]), Column("v", NUMERIC, X[:, 1]),
                  Column("w", NUMERIC, X[:, 2]), Column.categorical("cls", labels)), "cls")


# kNN

def test_knn_k1_returns_own_response():
    t = uniform_table(40, 3, seed=2)
    m = knn_fit(t, k=1)
    np.testing.assert_array_equal(m.predict(t), t["y"].values)


def test_knn_k_equals_n_is_constant():
    t = uniform_table(30, 3, seed=4)
    m = knn_fit(t, k=30)
    pred = m.predict(uniform_table(10, 3, seed=9))
    assert np.all(pred == pred[0])
    assert pred[0] == pytest.approx(t["y"].values.mean(), abs=1e-12)


def test_knn_1d_hand_case():
    # 1-D points 0,1,2,3,10 standardized; query equal to 1.2
    x = np.array([0.0, 1.0, 2.0, 3.0, 10.0])
    y = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    t = Table.from_arrays(x[:, None], y, ["x"])
    m = knn_fit(t, k=3)
    q = np.array([[1.2], [9.0]])
    # brute force in standardized space
    z = (x - x.mean()) / x.std()
    zq = (q[:, 0] - x.mean()) / x.std()
    expected = [y[np.argsort((z - v) ** 2, kind="stable")[:3]].mean() for v in zq]
    np.testing.assert_allclose(m.predict(q), expected, rtol=0, atol=1e-12)


def test_knn_ties_include_all():
    t = Table.from_arrays(np.array([[0.0], [1.0], [-1.0], [5.0]]), np.array([0.0, 1.0, 3.0, 9.0]),
                          ["x"])
    m = knn_fit(t, k=2)
    # the query at 0 has neighbour 0 at distance 0 and two rows tied at distance 1
    assert m.predict(np.array([[0.0]]))[0] == pytest.approx((0.0 + 1.0 + 3.0) / 3)


def test_knn_zero_variance_feature_warns():
    X = np.column_stack([np.arange(6.0), np.full(6, 2.0)])
    t = Table.from_arrays(X, np.arange(6.0), ["a", "b"])
    with pytest.warns(UserWarning, match="zero variance"):
        m = KNearestNeighbors(k=2).fit(t)
    assert list(m.used_) == [True, False]


def test_knn_k_too_large():
    with pytest.raises(ValueError):
        knn_fit(uniform_table(5, 2), k=6)


def test_knn_classification_probabilities():
    t = class_table()
    m = knn_fit(t, k=7)
    probs = m.predict_proba(t)
    assert probs.shape == (t.n, 3)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    assert np.all((probs >= 0) & (probs <= 1))


def test_knn_one_hot_categorical():
    labels = ["p", "q", "p", "q", "p"]
    t = Table((Column("x", NUMERIC, np.array([0.0, 0.0, 1.0, 1.0, 2.0])),
               Column.categorical("c", labels),
               Column("y", NUMERIC, np.array([1.0, 5.0, 1.0, 5.0, 1.0]))), "y")
    m = knn_fit(t, k=1)
    np.testing.assert_array_equal(m.predict(t), t["y"].values)


# forest

def test_forest_constant_response():
    t = uniform_table(50, 3, y_fn=lambda X: np.full(len(X), 4.5))
    f = RandomForest(n_trees=5, seed=0).fit(t)
    assert np.all(f.predict(uniform_table(20, 3, seed=8)) == 4.5)
    assert np.all(embedded_importance(f) == 0.0)
    assert all(tree.n_nodes == 1 for tree in f.trees_)


def test_forest_stump_predicts_training_mean():
    t = uniform_table(40, 3, seed=3)
    f = forest_fit(t, n_trees=1, min_node=t.n, seed=0)
    # bootstrap off so the single leaf holds exactly the training rows
    g = RandomForest(n_trees=1, min_node=t.n, bootstrap=False).fit(t)
    assert np.all(g.predict(t) == pytest.approx(t["y"].values.mean(), abs=1e-12))
    assert f.trees_[0].n_nodes == 1


def test_forest_training_r2(friedman_fit):
    t, f = friedman_fit
    y = t["y"].values
    r2 = 1 - np.sum((y - f.predict(t)) ** 2) / np.sum((y - y.mean()) ** 2)
    assert r2 > 0.8


def test_forest_embedded_importance_signal_beats_noise(friedman_fit):
    _, f = friedman_fit
    imp = embedded_importance(f)
    assert imp[3] > imp[5]
    assert np.all(imp >= 0)


def test_forest_unused_variable_zero_importance():
    rng = np.random.default_rng(0)
    X = np.column_stack([rng.uniform(size=80), np.zeros(80)])
    t = Table.from_arrays(X, X[:, 0] * 3, ["a", "b"])
    f = RandomForest(n_trees=10, mtry=2, seed=0).fit(t)
    assert embedded_importance(f)[1] == 0.0


def test_forest_no_bootstrap_interpolates_training_rows():
    t = uniform_table(60, 3, seed=6)
    f = RandomForest(n_trees=50, min_node=1, bootstrap=False, mtry=3, seed=0).fit(t)
    np.testing.assert_allclose(f.predict(t), t["y"].values, atol=1e-9)


def test_forest_deterministic_given_seed():
    t = uniform_table(80, 4, seed=1)
    a = RandomForest(n_trees=10, seed=7).fit(t).predict(t)
    b = RandomForest(n_trees=10, seed=7).fit(t).predict(t)
    np.testing.assert_array_equal(a, b)


def test_forest_column_order_invariance():
    t = uniform_table(100, 4, seed=2, y_fn=lambda X: X[:, 0] * X[:, 1] + X[:, 2])
    rev = t.select(["x4", "x3", "x2", "x1", "y"])
    a = RandomForest(n_trees=15, seed=3).fit(t)
    b = RandomForest(n_trees=15, seed=3).fit(rev)
    q = uniform_table(30, 4, seed=11)
    np.testing.assert_array_equal(a.predict(q), b.predict(q))
    np.testing.assert_array_equal(a.feature_importances_,
                                  b.feature_importances_[[3, 2, 1, 0]])


def test_forest_importance_additive_over_trees():
    t = uniform_table(100, 4, seed=2)
    f1 = RandomForest(n_trees=7, seed=1).fit(t)
    f2 = RandomForest(n_trees=7, seed=2).fit(t)
    both = RandomForest.combine([f1, f2])
    np.testing.assert_allclose(both.feature_importances_,
                               (f1.feature_importances_ + f2.feature_importances_) / 2,
                               rtol=1e-12)
    np.testing.assert_allclose(both.predict(t), (f1.predict(t) + f2.predict(t)) / 2, rtol=1e-12)


def test_forest_classification_probabilities():
    t = class_table()
    f = RandomForest(n_trees=20, seed=0).fit(t)
    probs = predict(f, t)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    assert set(f.predict(t)) <= {"a", "b", "c"}
    acc = np.mean(f.predict(t) == np.array(t["cls"].labels()))
    assert acc > 0.9


def test_forest_categorical_feature_split():
    rng = np.random.default_rng(1)
    labels = rng.choice(["lo", "mid", "hi"], size=150)
    base = {"lo": 0.0, "mid": 5.0, "hi": 10.0}
    y = np.array([base[v] for v in labels])
    t = Table((Column.categorical("c", labels), Column("noise", NUMERIC, rng.uniform(size=150)),
               Column("y", NUMERIC, y)), "y")
    f = RandomForest(n_trees=10, mtry=2, seed=0).fit(t)
    np.testing.assert_allclose(f.predict(t), y, atol=1e-9)


def test_predict_empty_block():
    t = uniform_table(30, 3)
    f = RandomForest(n_trees=3).fit(t)
    assert predict(f, np.empty((0, 3))).shape == (0,)
    fc = RandomForest(n_trees=3).fit(class_table())
    assert predict(fc, np.empty((0, 3))).shape == (0, 3)


def test_predict_schema_errors():
    t = Table((Column.categorical("c", ["a", "b", "a"]), Column("y", NUMERIC, np.arange(3.0))), "y")
    f = RandomForest(n_trees=2, min_node=1).fit(t)
    with pytest.raises(SchemaError, match="unseen level"):
        f.predict(Table((Column.categorical("c", ["z"]),)))
    with pytest.raises(SchemaError):
        f.predict(np.zeros((2, 3)))
    with pytest.raises(SchemaError, match="missing"):
        f.predict(Table((Column("other", NUMERIC, np.zeros(2)),)))


def test_sklearn_params_and_clone():
    f = RandomForest(n_trees=3, min_node=2, seed=4)
    assert f.get_params()["n_trees"] == 3
    g = clone(f)
    assert g.get_params() == f.get_params()
    assert KNearestNeighbors(k=3).set_params(k=5).k == 5


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1, 3, 7]))
def test_predictions_pure(seed, k):
    t = uniform_table(40, 3, seed=seed)
    m = knn_fit(t, k=k)
    q = uniform_table(15, 3, seed=seed + 1)
    a = m.predict(q)
    b = m.predict(q)
    np.testing.assert_array_equal(a, b)
    # chunking and row order do not change a row's prediction
    np.testing.assert_array_equal(m.predict(q.take(np.arange(14, -1, -1))), a[::-1])


def test_persist_round_trip(tmp_path):
    t = uniform_table(60, 3, seed=1)
    f = RandomForest(n_trees=5, seed=2).fit(t)
    path = tmp_path / "m.pkl"
    dump_model(f, path)
    g = load_model(path)
    np.testing.assert_array_equal(f.predict(t), g.predict(t))


def test_persist_rejects_other_pickles(tmp_path):
    path = tmp_path / "x.pkl"
    path.write_bytes(pickle.dumps({"something": 1}))
    with pytest.raises(ValueError):
        load_model(path)
