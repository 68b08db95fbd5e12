"""Shared predictor plumbing: schema coercion and the fitted-model contract."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..tabular import NUMERIC, DataError, FeatureSchema, Table
from ..validation import check_table

REGRESSION = "regression"
CLASSIFICATION = "classification"


class SchemaError(DataError):
    """Prediction rows do not match the schema the model was trained on."""


class Predictor(BaseEstimator):
    """Base class for everything that maps feature rows to predictions.

    Subclasses implement ``_fit(table)`` and ``_predict_coded(X)``, where
    ``X`` is a float matrix in training-schema column order with categorical
    columns holding level codes. Regression output is shape ``(m,)``;
    classification output is ``(m, K)`` class probabilities ordered as
    ``classes_``.

    Fitted attributes: ``schema_``, ``task_``, ``classes_`` (``None`` for
    regression) and ``response_``.
    """

    def fit(self, X, y=None):
        table = check_table(X, y)
        if table.response is None:
            raise DataError("training table needs a response column")
        self.response_ = table.response
        self.task_ = table.task
        self.schema_ = table.schema()
        if self.task_ == CLASSIFICATION:
            self.classes_ = table[table.response].levels
        else:
            self.classes_ = None
        self._fit(table)
        return self

    def _fit(self, table: Table):
        raise NotImplementedError

    def _predict_coded(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def feature_names_(self) -> tuple[str, ...]:
        return self.schema_.names

    @property
    def n_classes_(self) -> int:
        return 0 if self.classes_ is None else len(self.classes_)

    def coerce(self, X) -> np.ndarray:
        """Convert a table or coded array into the training-schema float block."""
        check_is_fitted(self, "schema_")
        return coerce_rows(self.schema_, X)

    def predict_output(self, X) -> np.ndarray:
        """Reals for regression, per-class probability rows for classification."""
        Xc = self.coerce(X)
        if Xc.shape[0] == 0:
            if self.task_ == CLASSIFICATION:
                return np.empty((0, self.n_classes_))
            return np.empty(0)
        return self._predict_coded(Xc)

    def predict_proba(self, X) -> np.ndarray:
        if self.task_ != CLASSIFICATION:
            raise AttributeError("predict_proba is only available for classification")
        return self.predict_output(X)

    def predict(self, X) -> np.ndarray:
        out = self.predict_output(X)
        if self.task_ == CLASSIFICATION:
            return np.asarray(self.classes_, dtype=object)[np.argmax(out, axis=1)]
        return out


def coerce_rows(schema: FeatureSchema, X) -> np.ndarray:
    if isinstance(X, Table):
        cols = []
        for name, kind, levels in zip(schema.names, schema.kinds, schema.levels):
            if name not in X:
                raise SchemaError(f"missing feature column {name!r}")
            col = X[name]
            if col.kind != kind:
                raise SchemaError(f"column {name!r} is {col.kind}, model expects {kind}")
            if kind == NUMERIC:
                cols.append(col.values)
                continue
            lookup = {lv: i for i, lv in enumerate(levels)}
            remap = np.empty(len(col.levels), dtype=np.float64)
            present = np.zeros(len(col.levels), dtype=bool)
            present[np.unique(col.values)] = True
            for code, lv in enumerate(col.levels):
                if lv in lookup:
                    remap[code] = lookup[lv]
                elif present[code]:
                    raise SchemaError(f"column {name!r} has unseen level {lv!r}")
                else:
                    remap[code] = -1.0
            cols.append(remap[col.values])
        if not cols:
            return np.empty((X.n, 0))
        return np.column_stack(cols).astype(np.float64)

    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size else X.reshape(0, schema.n_features)
    if X.ndim != 2 or X.shape[1] != schema.n_features:
        raise SchemaError(
            f"expected {schema.n_features} feature columns, got shape {X.shape}"
        )
    for j, (kind, levels) in enumerate(zip(schema.kinds, schema.levels)):
        if kind != NUMERIC and X.shape[0]:
            codes = X[:, j]
            if np.any(codes != np.round(codes)) or codes.min() < 0 or codes.max() >= len(levels):
                raise SchemaError(f"column {schema.names[j]!r} has invalid level codes")
    return X


def predict(p: Predictor, rows) -> np.ndarray:
    """Reals (regression) or per-class probability rows (classification)."""
    return p.predict_output(rows)
