"""k-nearest-neighbour predictor on standardized numerics and one-hot categoricals."""

from __future__ import annotations

import warnings

import numpy as np

from ..tabular import NUMERIC, Table
from ..validation import check_int
from .base import CLASSIFICATION, Predictor

_CHUNK = 256


class KNearestNeighbors(Predictor):
    """Average (or class frequencies) of the k nearest training rows.

    Distances are Euclidean after standardizing numeric features to mean 0,
    sd 1 and one-hot encoding categoricals. Every training row tied with the
    k-th nearest distance is included, so the neighbour set may exceed k.

    Parameters
    ----------
    k : int, default=7
        Number of neighbours.
    """

    def __init__(self, k=7):
        self.k = k

    def _fit(self, table: Table):
        k = check_int(self.k, "k")
        if k > table.n:
            raise ValueError(f"k={k} exceeds the number of training rows ({table.n})")
        X = table.feature_matrix()
        self.center_ = np.zeros(X.shape[1])
        self.scale_ = np.ones(X.shape[1])
        self.used_ = np.ones(X.shape[1], dtype=bool)
        for j, kind in enumerate(self.schema_.kinds):
            if kind != NUMERIC:
                continue
            sd = X[:, j].std()
            if sd == 0.0:
                warnings.warn(
                    f"feature {self.schema_.names[j]!r} has zero variance; "
                    "excluded from the distance",
                    stacklevel=3,
                )
                self.used_[j] = False
            else:
                self.center_[j] = X[:, j].mean()
                self.scale_[j] = sd
        self.train_embedding_ = self._embed(X)
        self.weights_ = self._weights()
        y = table[table.response].values
        if self.task_ == CLASSIFICATION:
            self.train_target_ = np.eye(self.n_classes_)[y]
        else:
            self.train_target_ = y.astype(np.float64)

    def _embed(self, X: np.ndarray) -> np.ndarray:
        # raw numerics; scaling is applied after differencing (see _weights)
        blocks = []
        for j, (kind, levels) in enumerate(zip(self.schema_.kinds, self.schema_.levels)):
            if not self.used_[j]:
                continue
            if kind == NUMERIC:
                blocks.append(X[:, j][:, None])
            else:
                codes = X[:, j].astype(np.int64)
                blocks.append((codes[:, None] == np.arange(len(levels))).astype(np.float64))
        if not blocks:
            return np.zeros((X.shape[0], 0))
        return np.hstack(blocks)

    def _weights(self) -> np.ndarray:
        w = []
        for j, (kind, levels) in enumerate(zip(self.schema_.kinds, self.schema_.levels)):
            if self.used_[j]:
                w += [1.0 / self.scale_[j]] if kind == NUMERIC else [1.0] * len(levels)
        return np.array(w)

    def _predict_coded(self, X):
        Q = self._embed(X)
        T = self.train_embedding_
        k = self.k
        out = []
        for start in range(0, Q.shape[0], _CHUNK):
            q = Q[start:start + _CHUNK]
            # explicit raw differences, scaled afterwards: distances do not
            # depend on chunking and equal raw gaps stay exactly tied
            d = (((q[:, None, :] - T[None, :, :]) * self.weights_) ** 2).sum(axis=2)
            kth = np.partition(d, k - 1, axis=1)[:, k - 1]
            mask = d <= kth[:, None]
            counts = mask.sum(axis=1)
            if self.task_ == CLASSIFICATION:
                # 0/1 sums are exact, so the matmul is order-independent
                out.append((mask.astype(np.float64) @ self.train_target_) / counts[:, None])
            else:
                out.append((mask * self.train_target_).sum(axis=1) / counts)
        return np.concatenate(out, axis=0)


def knn_fit(train: Table, k: int = 7) -> KNearestNeighbors:
    return KNearestNeighbors(k=k).fit(train)
