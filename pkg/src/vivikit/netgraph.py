"""Thresholded interaction graphs, node clustering and greedy Eulerian paths."""

from __future__ import annotations

import heapq
import json
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .arrange import agglomerate
from .vivi import ViviMatrix


@dataclass(frozen=True, eq=False)
class ViviGraph:
    """Graph over the variables of a VIVI matrix.

    ``nodes`` are matrix indices of variables touching at least one kept
    edge; ``isolated`` holds the rest. ``edges`` are ``(i, j, weight)`` with
    ``i < j`` in matrix indices.
    """

    names: list[str]
    importance: np.ndarray
    nodes: list[int]
    edges: list[tuple[int, int, float]]
    isolated: list[int]
    threshold: float
    interaction: np.ndarray = field(repr=False)

    def weight(self, i: int, j: int) -> float:
        return float(self.interaction[i, j])

    def adjacency(self) -> dict[int, dict[int, float]]:
        adj: dict[int, dict[int, float]] = {v: {} for v in self.nodes}
        for i, j, w in self.edges:
            adj[i][j] = w
            adj[j][i] = w
        return adj


def build_graph(M: ViviMatrix, threshold: float = 0.0) -> ViviGraph:
    """Keep edges with ``s_ij > threshold``; nodes without edges go to ``isolated``."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    s = M.interaction
    edges = [(i, j, float(s[i, j])) for i in range(M.p) for j in range(i + 1, M.p)
             if s[i, j] > threshold]
    touched = sorted({v for i, j, _ in edges for v in (i, j)})
    isolated = [v for v in range(M.p) if v not in set(touched)]
    return ViviGraph(list(M.names), M.importance, touched, edges, isolated,
                     float(threshold), s)


def _silhouette(d: np.ndarray, labels: np.ndarray) -> float:
    from sklearn.metrics import silhouette_score
    return float(silhouette_score(d, labels, metric="precomputed"))


def _cut(dend, k: int) -> np.ndarray:
    """Labels after undoing the last ``k - 1`` merges, numbered by smallest leaf."""
    p = dend.n_leaves
    members = {i: [i] for i in range(p)}
    for step, (a, b) in enumerate(dend.merges[: p - k]):
        members[p + step] = members.pop(int(a)) + members.pop(int(b))
    groups = sorted(members.values(), key=min)
    labels = np.empty(p, dtype=np.int64)
    for lab, grp in enumerate(groups):
        labels[grp] = lab
    return labels


def cluster_nodes(g: ViviGraph, method: str = "hierarchical") -> dict[int, int]:
    """Cluster graph nodes by edge-weight similarity (missing edge = 0).

    Average-linkage clustering is cut at the k in ``[2, min(6, n - 1)]``
    with the best silhouette. Graphs with one or two nodes form one cluster.
    """
    if method != "hierarchical":
        raise ValueError(f"unknown clustering method {method!r}")
    nodes = list(g.nodes)
    n = len(nodes)
    if n == 0:
        raise ValueError("graph has no nodes")
    if n <= 2:
        return {v: 0 for v in nodes}
    sim = np.zeros((n, n))
    pos = {v: i for i, v in enumerate(nodes)}
    for i, j, w in g.edges:
        sim[pos[i], pos[j]] = sim[pos[j], pos[i]] = w
    off = ~np.eye(n, dtype=bool)
    d = sim[off].max() - sim
    np.fill_diagonal(d, 0.0)
    dend = agglomerate(d, "average")
    best = None
    for k in range(2, min(6, n - 1) + 1):
        labels = _cut(dend, k)
        score = _silhouette(d, labels)
        if best is None or score > best[0] + 1e-12:
            best = (score, labels)
    return {v: int(best[1][pos[v]]) for v in nodes}


@dataclass(frozen=True)
class Step:
    """One traversed edge of an Eulerian sequence."""

    a: int
    b: int
    weight: float
    revisited: bool = False
    added: bool = False
    component: int = 0


@dataclass(frozen=True, eq=False)
class EulerSequence:
    names: list[str]
    nodes: list[int]
    steps: list[Step]
    breaks: list[int] = field(default_factory=list)
    repairs: int = 0

    @property
    def node_names(self) -> list[str]:
        return [self.names[v] for v in self.nodes]

    def to_dict(self) -> dict:
        return {
            "nodes": self.node_names,
            "steps": [
                {"from": self.names[s.a], "to": self.names[s.b], "weight": s.weight,
                 "revisited": s.revisited, "added": s.added, "component": s.component}
                for s in self.steps
            ],
            "breaks": list(self.breaks),
            "repairs": self.repairs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def _components(g: ViviGraph) -> list[list[int]]:
    adj = g.adjacency()
    seen, comps = set(), []
    for v in g.nodes:
        if v in seen:
            continue
        comp, stack = [], [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.append(u)
            for x in adj[u]:
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
        comps.append(sorted(comp))
    return comps


def _shortest_path(adj, src, dst) -> tuple[float, list[int]]:
    """Dijkstra with edge length 1 / weight; ties broken by node index."""
    dist = {src: 0.0}
    prev = {}
    heap = [(0.0, src)]
    done = set()
    while heap:
        du, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == dst:
            break
        for v in sorted(adj[u]):
            nd = du + 1.0 / adj[u][v]
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return dist[dst], path[::-1]


class _MultiGraph:
    """Undirected multigraph with per-edge copy ids for traversal bookkeeping."""

    def __init__(self):
        self.edges: list[tuple[int, int, float, bool]] = []  # (u, v, w, duplicate)
        self.incident: dict[int, list[int]] = defaultdict(list)
        self.used: list[bool] = []

    def add(self, u, v, w, duplicate=False):
        eid = len(self.edges)
        self.edges.append((u, v, w, duplicate))
        self.used.append(False)
        self.incident[u].append(eid)
        self.incident[v].append(eid)
        return eid

    def _key(self, u, eid):
        a, b, w, dup = self.edges[eid]
        other = b if a == u else a
        # heaviest first, originals before copies, then lowest neighbour
        return (-w, dup, other, eid)

    def unused_at(self, u) -> list[int]:
        return sorted((e for e in self.incident[u] if not self.used[e]),
                      key=lambda e: self._key(u, e))

    def is_bridge(self, eid) -> bool:
        """True if dropping unused edge ``eid`` disconnects its endpoints."""
        a, b, _, _ = self.edges[eid]
        self.used[eid] = True
        seen, stack = {a}, [a]
        while stack:
            u = stack.pop()
            for e in self.incident[u]:
                if self.used[e]:
                    continue
                x, y, _, _ = self.edges[e]
                v = y if x == u else x
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        self.used[eid] = False
        return b not in seen

    def walk(self, start, first) -> tuple[list[int], list[int]]:
        """Greedy Fleury walk: heaviest unused edge that is not a bridge."""
        nodes, eids = [start], []
        u, eid = start, first
        while eid is not None:
            self.used[eid] = True
            a, b, _, _ = self.edges[eid]
            u = b if a == u else a
            nodes.append(u)
            eids.append(eid)
            cands = self.unused_at(u)
            eid = next((e for e in cands if not self.is_bridge(e)), cands[0] if cands else None)
        return nodes, eids


def _pair_up(adj, pool, keep, must=None):
    """Greedy cheapest-path pairing until ``keep`` nodes remain unpaired."""
    pool = list(pool)
    paths = []
    while len(pool) > keep:
        last = len(pool) - 2 <= keep and must in pool
        best = None
        for x in range(len(pool)):
            for y in range(x + 1, len(pool)):
                if last and must not in (pool[x], pool[y]):
                    continue
                cost, path = _shortest_path(adj, pool[x], pool[y])
                key = (cost, pool[x], pool[y])
                if best is None or key < best[0]:
                    best = (key, path, pool[x], pool[y])
        _, path, u, v = best
        paths.append(path)
        pool.remove(u)
        pool.remove(v)
    return paths


def _walk_from(adj, edges, first_edge, start, paths):
    mg = _MultiGraph()
    first = None
    for i, j, w in edges:
        eid = mg.add(i, j, w)
        if (i, j) == first_edge:
            first = eid
    for path in paths:
        for s, t in zip(path[:-1], path[1:]):
            mg.add(s, t, adj[s][t], duplicate=True)
    repairs = len(paths)
    if mg.is_bridge(first) and len(mg.unused_at(start)) > 1:
        # leaving along a bridge would strand the start's other edges: cross
        # it three times instead (two extra copies keep every degree parity)
        a, b, w, _ = mg.edges[first]
        mg.add(a, b, w, duplicate=True)
        mg.add(a, b, w, duplicate=True)
        repairs += 1
    nodes, eids = mg.walk(start, first)
    return nodes, [mg.edges[e] for e in eids], repairs


def _component_walk(g: ViviGraph, comp: list[int]):
    """Eulerian walk of one component; returns (nodes, edge records, repairs).

    Both directions of the heaviest edge are tried, each with the greedy
    odd-node pairing that fits its start; the shortest walk wins, ties going
    to the start whose far end carries heavier edges.
    """
    adj = g.adjacency()
    comp_set = set(comp)
    edges = [(i, j, w) for i, j, w in g.edges if i in comp_set]
    a, b, _ = min(edges, key=lambda e: (-e[2], e[0], e[1]))
    odd = sorted(v for v in comp if len(adj[v]) % 2)

    def heaviest_other(v, other):
        ws = [w for x, w in adj[v].items() if x != other]
        return max(ws) if ws else -1.0

    starts = (a, b) if heaviest_other(b, a) >= heaviest_other(a, b) else (b, a)
    best = None
    for start in starts:
        if start in odd:
            options = [_pair_up(adj, [v for v in odd if v != start], 1)]
        else:
            options = [_pair_up(adj, odd, 0)]
            if odd:
                options.append(_pair_up(adj, sorted(odd + [start]), 1, must=start))
        for paths in options:
            walk = _walk_from(adj, edges, (a, b), start, paths)
            if best is None or (len(walk[1]), walk[2]) < (len(best[1]), best[2]):
                best = walk
    return best


def eulerian(g: ViviGraph, join_components: bool = True) -> EulerSequence:
    """Greedy weighted Eulerian sequence covering every edge at least once.

    Components are walked in descending order of their heaviest edge. Each
    walk starts along the heaviest edge and keeps taking the heaviest unused
    incident edge that does not cut off edges still to be walked; odd-degree nodes beyond the two path ends are repaired by
    duplicating the edges of the cheapest (1 / weight) paths between them.
    With ``join_components`` consecutive component walks are linked by an
    added edge; otherwise ``breaks`` marks where each new component starts.
    """
    if not g.edges:
        raise ValueError("graph has no edges")
    comps = _components(g)
    heaviest = {}
    for comp in comps:
        cs = set(comp)
        heaviest[comp[0]] = max(w for i, j, w in g.edges if i in cs)
    comps.sort(key=lambda c: (-heaviest[c[0]], c[0]))

    nodes: list[int] = []
    steps: list[Step] = []
    breaks: list[int] = []
    repairs = 0
    seen_pairs: set[tuple[int, int]] = set()
    for ci, comp in enumerate(comps):
        cnodes, cedges, r = _component_walk(g, comp)
        repairs += r
        if nodes:
            if join_components:
                u, v = nodes[-1], cnodes[0]
                steps.append(Step(u, v, g.weight(u, v), False, True, ci))
                seen_pairs.add((min(u, v), max(u, v)))
            else:
                breaks.append(len(nodes))
        for (s, t), rec in zip(zip(cnodes[:-1], cnodes[1:]), cedges):
            key = (min(s, t), max(s, t))
            steps.append(Step(s, t, rec[2], key in seen_pairs, False, ci))
            seen_pairs.add(key)
        nodes.extend(cnodes)
    return EulerSequence(list(g.names), nodes, steps, breaks, repairs)


def sequence_pairs(seq: EulerSequence) -> list[tuple[int, int]]:
    """Variable pairs in display order, one per step."""
    return [(s.a, s.b) for s in seq.steps]
