import pickle
import threading

import numpy as np
import pytest

from vivikit.models import CLASSIFICATION, ExternalModelError, external_predictor
from vivikit.tabular import Column, NUMERIC, Table

from conftest import child_command, uniform_table


def test_constant_child(spawn):
    t = uniform_table(25, 3)
    p = spawn(t, "const", 1.0)
    assert np.all(p.predict(t) == 1.0)


def test_row_index_child_preserves_order(spawn):
    t = uniform_table(40, 2)
    p = spawn(t, "index")
    np.testing.assert_array_equal(p.predict(t), np.arange(40.0))
    # the child is reused: a second batch restarts the index at 0
    np.testing.assert_array_equal(p.predict(t.take(np.arange(5))), np.arange(5.0))


def test_linear_child_full_precision(spawn):
    t = uniform_table(30, 2, seed=3)
    p = spawn(t, "linear", "2,3")
    X = t.feature_matrix()
    np.testing.assert_array_equal(p.predict(t), 2 * X[:, 0] + 3 * X[:, 1])


def test_categorical_columns_sent_as_labels(spawn):
    t = Table((Column("x", NUMERIC, np.array([1.0, 2.0, 3.0])),
               Column.categorical("c", ["u", "v", "u"])))
    p = spawn(t, "linear", "1")
    # non-numeric cells are skipped by the child, so only x counts
    np.testing.assert_array_equal(p.predict(t), [1.0, 2.0, 3.0])


def test_classification_child(spawn):
    t = uniform_table(20, 2, seed=1)
    p = spawn(t, "softmax", task=CLASSIFICATION)
    assert p.classes_ == ("a", "b", "c")
    probs = p.predict_proba(t)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    X = t.feature_matrix()
    e = np.exp(np.column_stack([X[:, 0], X[:, 1], np.zeros(20)]))
    np.testing.assert_allclose(probs, e / e.sum(axis=1, keepdims=True), rtol=1e-15)


def test_concurrent_calls_are_serialized(spawn):
    t = uniform_table(50, 2, seed=2)
    p = spawn(t, "linear", "1,1")
    expected = t.feature_matrix().sum(axis=1)
    results, errors = [], []

    def work():
        try:
            for _ in range(5):
                results.append(p.predict(t))
        except Exception as exc:  # pragma: no cover - reported below
            errors.append(exc)

    threads = [threading.Thread(target=work) for _ in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert not errors
    assert len(results) == 20
    for r in results:
        np.testing.assert_array_equal(r, expected)


@pytest.mark.parametrize("mode, fragment", [
    ("short", "row-count mismatch"),
    ("garbage", "malformed"),
    ("die", "exited"),
])
def test_child_failures(spawn, mode, fragment):
    t = uniform_table(4, 2)
    p = spawn(t, mode)
    with pytest.raises(ExternalModelError, match=fragment):
        p.predict(t)


def test_extra_lines_detected(spawn):
    t = uniform_table(3, 2)
    p = spawn(t, "extra")
    p.predict(t)
    with pytest.raises(ExternalModelError, match="row-count mismatch"):
        # give the reader thread a moment to queue the stray line
        import time
        time.sleep(0.2)
        p.predict(t)


def test_timeout(spawn):
    t = uniform_table(3, 2)
    p = spawn(t, "silent", timeout=0.5)
    with pytest.raises(ExternalModelError, match="timed out"):
        p.predict(t)


def test_unspawnable_command():
    t = uniform_table(3, 2)
    with pytest.raises(ExternalModelError, match="cannot start"):
        external_predictor(["/nonexistent/binary"], t.schema())


def test_pickle_restarts_child(spawn):
    t = uniform_table(10, 2)
    p = spawn(t, "linear", "1,0")
    q = pickle.loads(pickle.dumps(p))
    try:
        np.testing.assert_array_equal(q.predict(t), t["x1"].values)
    finally:
        q.close()


def test_missing_classes_header(spawn):
    t = uniform_table(3, 2)
    with pytest.raises(ExternalModelError, match="CLASSES"):
        external_predictor(child_command("const", 1), t.schema(), CLASSIFICATION, timeout=2.0)
