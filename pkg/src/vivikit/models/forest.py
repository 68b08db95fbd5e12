"""Bagged CART random forest with impurity-decrease importance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..tabular import NUMERIC, Table
from ..validation import check_int
from .base import CLASSIFICATION, Predictor

_MAX_SEED = 2**63 - 1


@dataclass
class Tree:
    """Flat array form of one fitted CART tree.

    ``feature`` is -1 at leaves. Numeric nodes send ``x <= threshold`` left;
    categorical nodes send a row left when ``left_levels[node, code]``.
    Feature indices refer to the forest's canonical (name-sorted) order.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    is_categorical: np.ndarray
    left_levels: np.ndarray
    value: np.ndarray
    n_node: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of ``X`` (canonical column order)."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            nd = node[active]
            f = self.feature[nd]
            x = X[active, f]
            go_left = x <= self.threshold[nd]
            cat = self.is_categorical[nd]
            if cat.any():
                codes = x[cat].astype(np.int64)
                go_left[cat] = self.left_levels[nd[cat], codes]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
            active = active[self.feature[node[active]] >= 0]
        return node


class _TreeBuilder:
    def __init__(self, X, y, kinds_cat, n_levels, n_classes, min_node, mtry, rng):
        self.X = X
        self.y = y
        self.cat = kinds_cat
        self.n_levels = n_levels
        self.max_levels = max([1] + [n for n, c in zip(n_levels, kinds_cat) if c])
        self.K = n_classes
        self.min_node = min_node
        self.mtry = mtry
        self.rng = rng
        self.importance = np.zeros(X.shape[1])
        if n_classes:
            self.onehot = np.eye(n_classes)[y]

    def _impurity(self, idx) -> float:
        """Node impurity times node size (SSE or n * Gini)."""
        if self.K:
            counts = self.onehot[idx].sum(axis=0)
            m = len(idx)
            return float(m - (counts @ counts) / m)
        yy = self.y[idx]
        return float(((yy - yy.mean()) ** 2).sum())

    def _leaf_value(self, idx):
        if self.K:
            return self.onehot[idx].sum(axis=0) / len(idx)
        return np.array([self.y[idx].mean()])

    def _is_pure(self, idx) -> bool:
        yy = self.y[idx]
        return bool(np.all(yy == yy[0]))

    def _categorical_ranks(self, x, yy):
        """Rank levels by mean response (or class share) for a subset split."""
        codes = x.astype(np.int64)
        present = np.unique(codes)
        if self.K == 2:
            score_y = (yy == 1).astype(np.float64)
        elif self.K:
            major = np.argmax(np.bincount(yy, minlength=self.K))
            score_y = (yy == major).astype(np.float64)
        else:
            score_y = yy
        sums = np.bincount(codes, weights=score_y, minlength=self.max_levels)
        cnts = np.bincount(codes, minlength=self.max_levels)
        means = sums[present] / cnts[present]
        order = present[np.lexsort((present, means))]
        rank = np.full(self.max_levels, -1.0)
        rank[order] = np.arange(len(order), dtype=np.float64)
        return rank[codes], order

    def _best_split(self, idx):
        m = len(idx)
        p = self.X.shape[1]
        feats = np.sort(self.rng.choice(p, size=self.mtry, replace=False))
        yy = self.y[idx]
        cols = []
        orders = {}
        for f in feats:
            x = self.X[idx, f]
            if self.cat[f]:
                x, orders[f] = self._categorical_ranks(x, yy)
            cols.append(x)
        Xn = np.column_stack(cols)
        srt = np.argsort(Xn, axis=0, kind="stable")
        xs = np.take_along_axis(Xn, srt, axis=0)
        n_left = np.arange(1, m, dtype=np.float64)[:, None]
        n_right = m - n_left
        if self.K:
            oh = self.onehot[idx][srt]  # (m, F, K)
            cl = np.cumsum(oh, axis=0)[:-1]
            tot = cl[-1] + oh[-1]
            cr = tot[None] - cl
            score = (n_left - (cl ** 2).sum(axis=2) / n_left) \
                + (n_right - (cr ** 2).sum(axis=2) / n_right)
        else:
            ys = yy[srt]
            s1 = np.cumsum(ys, axis=0)
            s2 = np.cumsum(ys * ys, axis=0)
            sl, sl2 = s1[:-1], s2[:-1]
            sr, sr2 = s1[-1] - sl, s2[-1] - sl2
            score = (sl2 - sl * sl / n_left) + (sr2 - sr * sr / n_right)
        valid = (xs[1:] > xs[:-1])
        valid &= (n_left >= self.min_node) & (n_right >= self.min_node)
        if not valid.any():
            return None
        score = np.where(valid, score, np.inf)
        # row-major over (position, feature); transpose so ties favour the
        # smallest canonical feature index, then the leftmost position
        flat = np.argmin(score.T)
        fi, pos = divmod(int(flat), m - 1)
        f = int(feats[fi])
        lo, hi = xs[pos, fi], xs[pos + 1, fi]
        go_left = Xn[:, fi] <= lo
        if self.cat[f]:
            mask = np.zeros(self.max_levels, dtype=bool)
            order = orders[f]
            mask[order[: int(lo) + 1]] = True
            return f, 0.0, mask, go_left
        thr = 0.5 * (lo + hi)
        if thr >= hi:
            thr = lo
        return f, thr, None, go_left

    def build(self, idx) -> Tree:
        feature, threshold, left, right, is_cat, masks, values, sizes = ([] for _ in range(8))

        def new_node(node_idx):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            is_cat.append(False)
            masks.append(None)
            values.append(self._leaf_value(node_idx))
            sizes.append(len(node_idx))
            return len(feature) - 1

        root = new_node(idx)
        stack = [(root, idx)]
        while stack:
            node, nidx = stack.pop()
            if len(nidx) < 2 * self.min_node or self._is_pure(nidx):
                continue
            found = self._best_split(nidx)
            if found is None:
                continue
            f, thr, mask, go_left = found
            li, ri = nidx[go_left], nidx[~go_left]
            gain = self._impurity(nidx) - self._impurity(li) - self._impurity(ri)
            self.importance[f] += max(gain, 0.0)
            feature[node] = f
            threshold[node] = thr
            is_cat[node] = mask is not None
            masks[node] = mask
            lnode = new_node(li)
            rnode = new_node(ri)
            left[node], right[node] = lnode, rnode
            # right pushed first so the left subtree gets lower node ids
            stack.append((rnode, ri))
            stack.append((lnode, li))

        level_table = np.zeros((len(feature), self.max_levels), dtype=bool)
        for i, mk in enumerate(masks):
            if mk is not None:
                level_table[i] = mk
        return Tree(
            feature=np.array(feature, dtype=np.int64),
            threshold=np.array(threshold, dtype=np.float64),
            left=np.array(left, dtype=np.int64),
            right=np.array(right, dtype=np.int64),
            is_categorical=np.array(is_cat, dtype=bool),
            left_levels=level_table,
            value=np.vstack(values),
            n_node=np.array(sizes, dtype=np.int64),
        )


class RandomForest(Predictor):
    """Random forest of bagged CART trees.

    Regression splits minimize the summed child sum of squares, classification
    splits minimize size-weighted Gini impurity. Categorical variables split
    into two level subsets after ordering the levels by mean response (class
    share for classification). Features are handled internally in name-sorted
    order, so a fit does not depend on the column order of the training table.

    Parameters
    ----------
    n_trees : int, default=100
    min_node : int, default=5
        Minimum number of (bootstrap) rows in a leaf.
    mtry : int or None, default=None
        Features tried per split; ``ceil(p/3)`` for regression and
        ``ceil(sqrt(p))`` for classification when ``None``.
    bootstrap : bool, default=True
    seed : int, default=0
    """

    def __init__(self, n_trees=100, min_node=5, mtry=None, bootstrap=True, seed=0):
        self.n_trees = n_trees
        self.min_node = min_node
        self.mtry = mtry
        self.bootstrap = bootstrap
        self.seed = seed

    def _fit(self, table: Table):
        n_trees = check_int(self.n_trees, "n_trees")
        min_node = check_int(self.min_node, "min_node")
        p = self.schema_.n_features
        if p == 0:
            raise ValueError("no predictor columns")
        if self.mtry is None:
            mtry = math.ceil(math.sqrt(p)) if self.task_ == CLASSIFICATION else math.ceil(p / 3)
        else:
            mtry = check_int(self.mtry, "mtry")
        if mtry > p:
            raise ValueError(f"mtry={mtry} exceeds the number of features ({p})")
        self.mtry_ = mtry

        names = self.schema_.names
        self.canonical_ = np.array(sorted(range(p), key=lambda j: names[j]), dtype=np.int64)
        X = table.feature_matrix()[:, self.canonical_]
        kinds_cat = [self.schema_.kinds[j] != NUMERIC for j in self.canonical_]
        n_levels = [len(self.schema_.levels[j]) if c else 0
                    for j, c in zip(self.canonical_, kinds_cat)]
        y = table[table.response].values
        n = table.n

        seeds = np.random.default_rng(self.seed).integers(0, _MAX_SEED, size=n_trees)
        self.tree_seeds_ = seeds
        self.trees_ = []
        self.tree_importance_ = np.zeros((n_trees, p))
        for t, s in enumerate(seeds):
            rng = np.random.default_rng(int(s))
            idx = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            builder = _TreeBuilder(X, y, kinds_cat, n_levels, self.n_classes_,
                                   min_node, mtry, rng)
            self.trees_.append(builder.build(idx))
            imp = np.zeros(p)
            imp[self.canonical_] = builder.importance
            self.tree_importance_[t] = imp

    def _predict_coded(self, X):
        Xc = X[:, self.canonical_]
        total = None
        for tree in self.trees_:
            v = tree.value[tree.apply(Xc)]
            total = v if total is None else total + v
        out = total / len(self.trees_)
        if self.task_ == CLASSIFICATION:
            return out
        return out[:, 0]

    @property
    def feature_importances_(self) -> np.ndarray:
        """Impurity decrease per variable summed over trees, divided by n_trees."""
        return self.tree_importance_.sum(axis=0) / len(self.trees_)

    @classmethod
    def combine(cls, forests) -> "RandomForest":
        """Pool the trees of several forests fit on the same schema."""
        forests = list(forests)
        first = forests[0]
        for f in forests[1:]:
            if f.schema_ != first.schema_ or f.task_ != first.task_:
                raise ValueError("forests were fit on different schemas")
        out = cls(**first.get_params())
        out.n_trees = sum(len(f.trees_) for f in forests)
        for attr in ("response_", "task_", "schema_", "classes_", "mtry_", "canonical_"):
            setattr(out, attr, getattr(first, attr))
        out.trees_ = [t for f in forests for t in f.trees_]
        out.tree_seeds_ = np.concatenate([f.tree_seeds_ for f in forests])
        out.tree_importance_ = np.vstack([f.tree_importance_ for f in forests])
        return out


def forest_fit(train: Table, n_trees: int = 100, min_node: int = 5,
               mtry: int | None = None, seed: int = 0) -> RandomForest:
    return RandomForest(n_trees=n_trees, min_node=min_node, mtry=mtry, seed=seed).fit(train)


def embedded_importance(forest: RandomForest) -> np.ndarray:
    return forest.feature_importances_
