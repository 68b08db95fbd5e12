"""Permutation importance, Friedman H-statistics and the VIVI matrix."""

from __future__ import annotations

import csv
import io
import itertools
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .models.base import CLASSIFICATION, Predictor
from .models.forest import RandomForest
from .pdp import _replicate, _row_means, ice_matrix, link_output
from .tabular import Table
from .validation import check_int, rng_from_seed

LOGLOSS_EPS = 1e-15
FLAT_DENOMINATOR = 1e-12


class FlatSurfaceWarning(UserWarning):
    """Normalized H requested for a pair whose joint partial dependence is flat."""


@dataclass(eq=False)
class ViviMatrix:
    """Importance on the diagonal, pairwise interaction off the diagonal.

    ``values`` holds importances clipped at 0; ``importance_raw`` keeps the
    unclipped numbers. ``flagged`` lists pairs whose normalized H² exceeds 1
    and ``flat_pairs`` those reported as 0 because the joint surface was flat.
    """

    names: list[str]
    values: np.ndarray
    importance_raw: np.ndarray
    importance_measure: str
    interaction_measure: str
    sample_rows: int
    seed: int
    flagged: list[tuple[str, str]] = field(default_factory=list)
    flat_pairs: list[tuple[str, str]] = field(default_factory=list)

    @property
    def p(self) -> int:
        return len(self.names)

    @property
    def importance(self) -> np.ndarray:
        return np.diag(self.values).copy()

    @property
    def interaction(self) -> np.ndarray:
        """Copy of the matrix with a zero diagonal."""
        s = self.values.copy()
        np.fill_diagonal(s, 0.0)
        return s

    def index(self, name: str) -> int:
        return self.names.index(name)

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "values": [[float(v) for v in row] for row in self.values],
            "importance_raw": [float(v) for v in self.importance_raw],
            "importance_measure": self.importance_measure,
            "interaction_measure": self.interaction_measure,
            "sample_rows": int(self.sample_rows),
            "seed": int(self.seed),
            "flagged": [list(p) for p in self.flagged],
            "flat_pairs": [list(p) for p in self.flat_pairs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_dict(cls, d) -> "ViviMatrix":
        return cls(
            names=list(d["names"]),
            values=np.array(d["values"], dtype=np.float64).reshape(len(d["names"]), -1),
            importance_raw=np.array(d["importance_raw"], dtype=np.float64),
            importance_measure=d["importance_measure"],
            interaction_measure=d["interaction_measure"],
            sample_rows=int(d["sample_rows"]),
            seed=int(d["seed"]),
            flagged=[tuple(p) for p in d.get("flagged", [])],
            flat_pairs=[tuple(p) for p in d.get("flat_pairs", [])],
        )

    @classmethod
    def from_json(cls, text: str) -> "ViviMatrix":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + list(self.names))
        for name, row in zip(self.names, self.values):
            writer.writerow([name] + ["%.17g" % v for v in row])
        return buf.getvalue()


def _metric(name: str, task: str):
    if name == "rmse":
        if task == CLASSIFICATION:
            raise ValueError("rmse needs a regression model; use logloss")
        return lambda y, pred: float(np.sqrt(np.mean((y - pred) ** 2)))
    if name == "logloss":
        if task != CLASSIFICATION:
            raise ValueError("logloss needs a classification model")

        def logloss(y, probs):
            picked = probs[np.arange(len(y)), y]
            return float(-np.mean(np.log(np.clip(picked, LOGLOSS_EPS, 1.0))))
        return logloss
    raise ValueError(f"unknown metric {name!r}")


def _response_codes(p: Predictor, table: Table) -> np.ndarray:
    col = table[table.response]
    if p.task_ != CLASSIFICATION:
        return col.values
    lookup = {c: i for i, c in enumerate(p.classes_)}
    try:
        return np.array([lookup[lv] for lv in col.levels], dtype=np.int64)[col.values]
    except KeyError as exc:
        raise ValueError(f"response level {exc.args[0]!r} unknown to the model") from None


def permutation_importance(p: Predictor, table: Table, metric: str | None = None,
                           n_perm: int = 4, seed: int = 0, rng=None) -> np.ndarray:
    """Mean increase in loss after permuting each feature column (raw, may be < 0).

    ``rng`` may be any object with a numpy-style ``permutation(n)`` method;
    it overrides ``seed``.
    """
    if table.response is None:
        raise ValueError("permutation importance needs a table with a response")
    n_perm = check_int(n_perm, "n_perm")
    if metric is None:
        metric = "logloss" if p.task_ == CLASSIFICATION else "rmse"
    score = _metric(metric, p.task_)
    rng = rng_from_seed(seed) if rng is None else rng
    X = p.coerce(table)
    y = _response_codes(p, table)
    n = X.shape[0]
    baseline = score(y, p.predict_output(X))
    out = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        total = 0.0
        for _ in range(n_perm):
            Xp = X.copy()
            Xp[:, j] = X[np.asarray(rng.permutation(n)), j]
            total += score(y, p.predict_output(Xp)) - baseline
        out[j] = total / n_perm
    return out


def draw_sample(n: int, size: int, seed) -> np.ndarray:
    """Sorted seeded sample of ``min(size, n)`` distinct row indices."""
    size = min(check_int(size, "sample_rows"), n)
    return np.sort(rng_from_seed(seed).choice(n, size=size, replace=False))


def _centered(v: np.ndarray) -> np.ndarray:
    return v - v.sum() / len(v)


def _pd_single(p: Predictor, Xs: np.ndarray, j: int, class_index) -> np.ndarray:
    """Centered f_j evaluated at each sampled row, averaging over the sample."""
    return _centered(_row_means(ice_matrix(p, Xs, j, Xs[:, j], class_index)))


def _pd_pair(p: Predictor, Xs: np.ndarray, j: int, k: int, class_index) -> np.ndarray:
    out = link_output(p, _replicate(Xs, [j, k], Xs[:, [j, k]]), class_index)
    return _centered(_row_means(out.reshape(Xs.shape[0], Xs.shape[0])))


def _h_from_parts(fjk, fj, fk, normalized: bool):
    resid = fjk - fj - fk
    num = float((resid * resid).sum())
    if not normalized:
        return float(np.sqrt(num / len(fjk))), False
    den = float((fjk * fjk).sum())
    if den < FLAT_DENOMINATOR:
        return 0.0, True
    return num / den, False


def _sampled_block(p: Predictor, table: Table, rows, seed) -> np.ndarray:
    X = p.coerce(table)
    return X[draw_sample(X.shape[0], rows, seed)]


def _pair_indices(p: Predictor, j, k) -> tuple[int, int]:
    j = p.schema_.index(j) if isinstance(j, str) else int(j)
    k = p.schema_.index(k) if isinstance(k, str) else int(k)
    if j == k:
        raise ValueError("H-statistic needs two different variables")
    # fixed evaluation order, so H(j, k) and H(k, j) are bitwise equal
    return min(j, k), max(j, k)


def h_unnormalized(p: Predictor, table: Table, j, k, sample_rows: int = 50,
                   seed: int = 0, class_index: int | None = None) -> float:
    """Root-mean-square of ``f_jk - f_j - f_k`` over a seeded row sample."""
    j, k = _pair_indices(p, j, k)
    Xs = _sampled_block(p, table, sample_rows, seed)
    h, _ = _h_from_parts(_pd_pair(p, Xs, j, k, class_index),
                         _pd_single(p, Xs, j, class_index),
                         _pd_single(p, Xs, k, class_index), normalized=False)
    return h


def h_normalized(p: Predictor, table: Table, j, k, sample_rows: int = 50,
                 seed: int = 0, class_index: int | None = None) -> float:
    """Friedman's H² (residual sum of squares over the joint sum of squares).

    A flat joint surface (denominator below 1e-12) yields 0 and a
    :class:`FlatSurfaceWarning`.
    """
    j, k = _pair_indices(p, j, k)
    Xs = _sampled_block(p, table, sample_rows, seed)
    h2, flat = _h_from_parts(_pd_pair(p, Xs, j, k, class_index),
                             _pd_single(p, Xs, j, class_index),
                             _pd_single(p, Xs, k, class_index), normalized=True)
    if flat:
        warnings.warn(f"flat joint partial dependence for pair {j},{k}; H² reported as 0",
                      FlatSurfaceWarning, stacklevel=2)
    return h2


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def interaction_matrix(p: Predictor, table: Table, measure: str = "h",
                       sample_rows: int = 50, seed: int = 0, threads: int = 1,
                       class_index: int | None = None):
    """All pairwise interactions; returns ``(matrix, flat_pairs, over_one_pairs)``.

    Work is split per variable and per pair, and each item is reduced in a
    fixed order, so the result does not depend on ``threads``.
    """
    if measure not in ("h", "h2"):
        raise ValueError(f"unknown interaction measure {measure!r}")
    Xs = _sampled_block(p, table, sample_rows, seed)
    nfeat = Xs.shape[1]
    singles = _map(lambda j: _pd_single(p, Xs, j, class_index), range(nfeat), threads)
    pairs = list(itertools.combinations(range(nfeat), 2))
    joints = _map(lambda jk: _pd_pair(p, Xs, jk[0], jk[1], class_index), pairs, threads)
    S = np.zeros((nfeat, nfeat))
    flat, over = [], []
    for (j, k), fjk in zip(pairs, joints):
        v, is_flat = _h_from_parts(fjk, singles[j], singles[k], measure == "h2")
        S[j, k] = S[k, j] = v
        if is_flat:
            flat.append((j, k))
        if measure == "h2" and v > 1.0:
            over.append((j, k))
    return S, flat, over


def vivi_matrix(p: Predictor, table: Table, importance="permutation",
                interaction: str = "h", sample_rows: int = 50, n_perm: int = 4,
                seed: int = 0, threads: int = 1, class_index: int | None = None) -> ViviMatrix:
    """Assemble the VIVI matrix for a fitted predictor.

    ``importance`` is ``'permutation'``, ``'embedded'`` (random forests
    only) or a vector with one value per feature.
    """
    names = list(p.schema_.names)
    if isinstance(importance, str):
        if importance == "embedded":
            if not isinstance(p, RandomForest):
                raise ValueError("embedded importance is only available for the random forest")
            raw = np.asarray(p.feature_importances_, dtype=np.float64)
        elif importance == "permutation":
            raw = permutation_importance(p, table, n_perm=n_perm, seed=seed)
        else:
            raise ValueError(f"unknown importance measure {importance!r}")
        imp_tag = importance
    else:
        raw = np.asarray(importance, dtype=np.float64).ravel()
        if raw.shape != (len(names),):
            raise ValueError(f"importance vector needs {len(names)} entries, got {raw.shape}")
        imp_tag = "supplied"
    S, flat, over = interaction_matrix(p, table, interaction, sample_rows, seed,
                                       threads, class_index)
    if interaction == "h2":
        for j, k in flat:
            warnings.warn(f"flat joint partial dependence for ({names[j]}, {names[k]}); "
                          "H² reported as 0", FlatSurfaceWarning, stacklevel=2)
    values = S.copy()
    np.fill_diagonal(values, np.maximum(raw, 0.0))
    return ViviMatrix(
        names=names,
        values=values,
        importance_raw=raw.copy(),
        importance_measure=imp_tag,
        interaction_measure="normalized-H2" if interaction == "h2" else "unnormalized-H",
        sample_rows=min(sample_rows, table.n),
        seed=seed,
        flagged=[(names[j], names[k]) for j, k in over],
        flat_pairs=[(names[j], names[k]) for j, k in flat],
    )
