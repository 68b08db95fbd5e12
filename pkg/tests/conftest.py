import sys
from pathlib import Path

import numpy as np
import pytest

from vivikit.models import REGRESSION, external_predictor
from vivikit.models.base import Predictor
from vivikit.tabular import Table

HERE = Path(__file__).parent
CHILD = HERE / "children" / "oracle_child.py"
DATA = HERE / "data"


def child_command(mode, arg=None):
    cmd = [sys.executable, str(CHILD), mode]
    if arg is not None:
        cmd.append(str(arg))
    return cmd


@pytest.fixture
def spawn():
    """Start external oracles and close them after the test."""
    started = []

    def _spawn(table, mode, arg=None, task=REGRESSION, timeout=10.0):
        p = external_predictor(child_command(mode, arg), table.schema(), task, timeout)
        started.append(p)
        return p

    yield _spawn
    for p in started:
        p.close()


class FunctionModel(Predictor):
    """In-process regression model computing ``fn(X)`` on the coded block."""

    def __init__(self, fn=None):
        self.fn = fn

    def _fit(self, table):
        return self

    def _predict_coded(self, X):
        return np.asarray(self.fn(X), dtype=np.float64).reshape(X.shape[0])


class IgnoreColumn(Predictor):
    """Wrap a fitted model and overwrite one feature with a constant first."""

    def __init__(self, inner=None, column=0):
        self.inner = inner
        self.column = column

    def _fit(self, table):
        return self

    def _predict_coded(self, X):
        Xc = X.copy()
        Xc[:, self.column] = 0.0
        return self.inner._predict_coded(Xc)


def uniform_table(n, p, seed=0, y_fn=None):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, p))
    y = y_fn(X) if y_fn is not None else X.sum(axis=1)
    return Table.from_arrays(X, y, [f"x{i + 1}" for i in range(p)])


# acceptance criteria outcomes, filled by test_acceptance and echoed at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
