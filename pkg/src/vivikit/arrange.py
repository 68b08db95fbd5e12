"""Seriation of a VIVI matrix: interaction clustering plus weighted leaf sorting."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .vivi import ViviMatrix

LINKAGES = ("average", "complete", "single")


@dataclass(frozen=True, eq=False)
class Dendrogram:
    """Binary merge tree in the usual linkage layout.

    Leaves are ``0..p-1``; merge ``i`` creates node ``p + i`` from
    ``merges[i] = (left, right)`` at ``heights[i]``.
    """

    n_leaves: int
    merges: np.ndarray
    heights: np.ndarray

    @property
    def root(self) -> int:
        return 2 * self.n_leaves - 2

    def children(self, node: int) -> tuple[int, int] | None:
        if node < self.n_leaves:
            return None
        a, b = self.merges[node - self.n_leaves]
        return int(a), int(b)

    def leaves(self, node: int | None = None) -> list[int]:
        node = self.root if node is None else node
        out, stack = [], [node]
        while stack:
            nd = stack.pop()
            ch = self.children(nd)
            if ch is None:
                out.append(nd)
            else:
                stack.extend(reversed(ch))
        return out

    def internal_nodes(self) -> range:
        return range(self.n_leaves, 2 * self.n_leaves - 1)


@dataclass(frozen=True, eq=False)
class Ordering:
    order: list[int]
    names: list[str]
    weights: np.ndarray
    lambdas: tuple[float, float]
    constrained: bool = field(default=True)

    @property
    def ordered_names(self) -> list[str]:
        return [self.names[i] for i in self.order]

    def to_json(self) -> str:
        return json.dumps(self.ordered_names) + "\n"


def interaction_dissimilarity(M: ViviMatrix) -> np.ndarray:
    """``max(s) - s_ij`` off the diagonal, zero on it."""
    s = M.interaction
    if M.p < 2:
        return np.zeros((M.p, M.p))
    off = ~np.eye(M.p, dtype=bool)
    d = s[off].max() - s
    np.fill_diagonal(d, 0.0)
    return d


def agglomerate(d: np.ndarray, linkage: str = "average") -> Dendrogram:
    """Naive agglomerative clustering of a dissimilarity matrix.

    Ties between candidate merges go to the pair whose smallest leaf indices
    are lexicographically smallest; the child holding the smaller leaf index
    becomes the left child.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}")
    d = np.asarray(d, dtype=np.float64)
    p = d.shape[0]
    if p < 1:
        raise ValueError("need at least one item")
    reduce = {"average": np.mean, "complete": np.max, "single": np.min}[linkage]
    clusters = {i: [i] for i in range(p)}
    merges, heights = [], []
    next_id = p
    while len(clusters) > 1:
        ids = sorted(clusters, key=lambda c: min(clusters[c]))
        best = None
        for x in range(len(ids)):
            for y in range(x + 1, len(ids)):
                a, b = ids[x], ids[y]
                dist = float(reduce(d[np.ix_(clusters[a], clusters[b])]))
                key = (dist, min(clusters[a]), min(clusters[b]))
                if best is None or key < best[0]:
                    best = (key, a, b)
        (dist, _, _), a, b = best
        merges.append((a, b))
        heights.append(dist)
        clusters[next_id] = clusters.pop(a) + clusters.pop(b)
        next_id += 1
    heights = np.maximum.accumulate(np.array(heights, dtype=np.float64)) if heights \
        else np.zeros(0)
    return Dendrogram(p, np.array(merges, dtype=np.int64).reshape(-1, 2), heights)


def cluster_interactions(M: ViviMatrix, linkage: str = "average") -> Dendrogram:
    """Hierarchical clustering treating interactions as similarities."""
    if M.p < 2:
        raise ValueError("clustering needs at least two variables")
    return agglomerate(interaction_dissimilarity(M), linkage)


def _unit_range(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def sort_weights(M: ViviMatrix, lambda1: float, lambda2: float) -> np.ndarray:
    """``lambda1 * v + lambda2 * max_j s_ij`` with both parts rescaled to unit range."""
    v = _unit_range(M.importance)
    if M.p < 2:
        return lambda1 * v
    s = M.interaction
    off = ~np.eye(M.p, dtype=bool)
    lo, hi = s[off].min(), s[off].max()
    s_scaled = (s - lo) / (hi - lo) if hi > lo else np.zeros_like(s)
    s_scaled[~off] = -np.inf
    return lambda1 * v + lambda2 * s_scaled.max(axis=1)


def leaf_sort(dend: Dendrogram | None, M: ViviMatrix, lambda1: float = 1.0,
              lambda2: float = 1.0) -> Ordering:
    """Flip dendrogram nodes so weights generally decrease left to right.

    At every internal node the child with the larger maximum weight goes
    first (ties: larger mean weight, then smaller leaf index). When either
    lambda is 0 the tree is ignored and variables are sorted by descending
    weight, ties by index.
    """
    if lambda1 < 0 or lambda2 < 0 or lambda1 + lambda2 <= 0:
        raise ValueError("lambdas must be >= 0 with a positive sum")
    w = sort_weights(M, lambda1, lambda2)
    if lambda1 == 0 or lambda2 == 0 or dend is None or M.p < 2:
        order = sorted(range(M.p), key=lambda i: (-w[i], i))
        return Ordering(order, list(M.names), w, (lambda1, lambda2), constrained=False)

    def key(leaves):
        ws = w[leaves]
        return (-ws.max(), -ws.mean(), min(leaves))

    def arrange(node) -> list[int]:
        ch = dend.children(node)
        if ch is None:
            return [node]
        parts = [arrange(c) for c in ch]
        parts.sort(key=key)
        return parts[0] + parts[1]

    return Ordering(arrange(dend.root), list(M.names), w, (lambda1, lambda2))


def seriate(M: ViviMatrix, lambda1: float = 1.0, lambda2: float = 1.0,
            linkage: str = "average") -> Ordering:
    dend = cluster_interactions(M, linkage) if M.p >= 2 else None
    return leaf_sort(dend, M, lambda1, lambda2)


def is_dendrogram_consistent(order, dend: Dendrogram) -> bool:
    """Every internal node's leaf set occupies a contiguous run of ``order``."""
    pos = {leaf: i for i, leaf in enumerate(order)}
    for node in dend.internal_nodes():
        spots = sorted(pos[leaf] for leaf in dend.leaves(node))
        if spots[-1] - spots[0] != len(spots) - 1:
            return False
    return True
