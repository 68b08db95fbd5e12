import itertools
import json
import time
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vivikit.netgraph import (ViviGraph, build_graph, cluster_nodes, eulerian,
                              sequence_pairs)
from vivikit.vivi import ViviMatrix


def matrix(S, importance=None):
    S = np.array(S, dtype=float)
    p = S.shape[0]
    importance = np.ones(p) if importance is None else np.asarray(importance, float)
    v = S.copy()
    np.fill_diagonal(v, importance)
    return ViviMatrix([f"v{i}" for i in range(p)], v, importance.copy(),
                      "supplied", "unnormalized-H", 50, 0)


def graph(p, edges):
    S = np.zeros((p, p))
    for i, j, w in edges:
        S[i, j] = S[j, i] = w
    return build_graph(matrix(S), 0.0)


def degrees(edges):
    deg = {}
    for i, j, _ in edges:
        deg[i] = deg.get(i, 0) + 1
        deg[j] = deg.get(j, 0) + 1
    return deg


def n_components(edges):
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            x = parent[x]
        return x

    for i, j, _ in edges:
        parent[find(i)] = find(j)
    return len({find(v) for e in edges for v in e[:2]})


def random_edges(rng, max_nodes=10, max_edges=20):
    p = int(rng.integers(2, max_nodes + 1))
    pairs = list(itertools.combinations(range(p), 2))
    m = int(rng.integers(1, min(max_edges, len(pairs)) + 1))
    chosen = rng.choice(len(pairs), m, replace=False)
    weights = rng.permutation(m) + 1.0
    return p, sorted((pairs[c][0], pairs[c][1], float(w)) for c, w in zip(chosen, weights))


def check_sequence(g, seq):
    original = {(i, j) for i, j, _ in g.edges}
    walked = [(min(s.a, s.b), max(s.a, s.b)) for s in seq.steps]
    assert original <= set(walked)
    for s in seq.steps:
        assert s.added or (min(s.a, s.b), max(s.a, s.b)) in original
        assert s.weight > 0 or s.added
    # consecutive steps share a node unless a component boundary sits between them
    for s, t in zip(seq.steps[:-1], seq.steps[1:]):
        assert s.b == t.a or (s.component != t.component and seq.breaks)
    assert seq.steps[0].weight == max(w for _, _, w in g.edges)


# build_graph


def test_threshold_zero_on_positive_matrix_gives_complete_graph():
    rng = np.random.default_rng(1)
    A = rng.uniform(0.1, 1.0, (5, 5))
    g = build_graph(matrix((A + A.T) / 2), 0.0)
    assert len(g.edges) == 10
    assert g.nodes == list(range(5)) and g.isolated == []
    assert all(i < j and w > 0 for i, j, w in g.edges)


def test_threshold_above_max_gives_empty_graph():
    S = np.full((4, 4), 0.3)
    g = build_graph(matrix(S), 0.5)
    assert g.edges == [] and g.nodes == []
    assert g.isolated == [0, 1, 2, 3]


def test_threshold_is_strict():
    S = np.zeros((3, 3))
    S[0, 1] = S[1, 0] = 0.08
    S[1, 2] = S[2, 1] = 0.081
    g = build_graph(matrix(S), 0.08)
    assert [(i, j) for i, j, _ in g.edges] == [(1, 2)]
    assert g.isolated == [0]


def test_sparse_matrix_keeps_only_strong_pairs():
    # ten variables, eight pairs above 0.08 spanning eight variables
    rng = np.random.default_rng(3)
    A = rng.uniform(0.0, 0.07, (10, 10))
    S = (A + A.T) / 2
    strong = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]
    for i, j in strong:
        S[i, j] = S[j, i] = rng.uniform(0.09, 0.3)
    g = build_graph(matrix(S), 0.08)
    assert [(i, j) for i, j, _ in g.edges] == strong
    assert len(g.nodes) == 8 and g.isolated == [8, 9]


def test_negative_threshold_rejected():
    with pytest.raises(ValueError):
        build_graph(matrix(np.zeros((2, 2))), -0.1)


# cluster_nodes


def silhouette(d, labels):
    """Plain silhouette: singleton clusters score 0."""
    n = len(labels)
    out = []
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            out.append(0.0)
            continue
        a = np.mean([d[i, j] for j in own])
        b = min(np.mean([d[i, j] for j in range(n) if labels[j] == c])
                for c in set(labels) if c != labels[i])
        out.append((b - a) / max(a, b) if max(a, b) > 0 else 0.0)
    return float(np.mean(out))


def test_two_disjoint_cliques_give_two_clusters():
    edges = [(i, j, 1.0) for i, j in itertools.combinations(range(3), 2)]
    edges += [(i, j, 1.0) for i, j in itertools.combinations(range(3, 6), 2)]
    labels = cluster_nodes(graph(6, edges))
    assert len(set(labels.values())) == 2
    assert labels[0] == labels[1] == labels[2] != labels[3] == labels[4] == labels[5]


def test_single_node_graph_is_one_cluster():
    g = ViviGraph(["a"], np.ones(1), [0], [], [], 0.0, np.zeros((1, 1)))
    assert cluster_nodes(g) == {0: 0}


def test_two_node_graph_is_one_cluster():
    assert cluster_nodes(graph(2, [(0, 1, 0.5)])) == {0: 0, 1: 0}


def test_triangle_plus_pendant_separates_pendant():
    g = graph(4, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (0, 3, 0.2)])
    labels = cluster_nodes(g)
    assert labels[0] == labels[1] == labels[2] != labels[3]
    # by hand: with d = max(s) - s the split {0,1,2} | {3} scores 3/4, the best
    d = 1.0 - g.interaction[:4, :4]
    np.fill_diagonal(d, 0.0)
    candidates = {}
    for assign in itertools.product(range(3), repeat=4):
        if 2 <= len(set(assign)) <= 3:
            candidates[assign] = silhouette(d, assign)
    best = max(candidates.values())
    assert best == pytest.approx(0.75)
    assert silhouette(d, [labels[v] for v in range(4)]) == pytest.approx(best)


def test_unknown_cluster_method_rejected():
    with pytest.raises(ValueError):
        cluster_nodes(graph(3, [(0, 1, 1.0)]), method="spectral")


# eulerian


def test_single_edge_sequence():
    seq = eulerian(graph(2, [(0, 1, 0.4)]))
    assert seq.nodes == [0, 1]
    assert len(seq.steps) == 1 and not seq.steps[0].revisited


def test_triangle_is_a_circuit_starting_on_heaviest_edge():
    seq = eulerian(graph(3, [(0, 1, 3.0), (1, 2, 1.0), (0, 2, 2.0)]))
    assert len(seq.steps) == 3
    assert seq.steps[0].weight == 3.0
    assert {(min(s.a, s.b), max(s.a, s.b)) for s in seq.steps} == {(0, 1), (1, 2), (0, 2)}
    assert not any(s.revisited or s.added for s in seq.steps)
    assert seq.nodes[0] == seq.nodes[-1]


def shortest_cover(edges, first):
    """Fewest steps of any walk starting along ``first`` covering all edges."""
    key = {frozenset(e[:2]): k for k, e in enumerate(edges)}
    full = (1 << len(edges)) - 1
    adj = {}
    for i, j, _ in edges:
        adj.setdefault(i, []).append(j)
        adj.setdefault(j, []).append(i)
    best = None
    for start, nxt in (first, first[::-1]):
        bit = 1 << key[frozenset((start, nxt))]
        frontier = deque([(nxt, bit, 1)])
        seen = {(nxt, bit)}
        while frontier:
            u, mask, n = frontier.popleft()
            if mask == full:
                best = n if best is None else min(best, n)
                break
            for v in adj[u]:
                state = (v, mask | 1 << key[frozenset((u, v))])
                if state not in seen:
                    seen.add(state)
                    frontier.append((*state, n + 1))
    return best


def test_star_covers_every_edge_with_a_minimal_walk():
    edges = [(0, 1, 3.0), (0, 2, 2.0), (0, 3, 1.0)]
    g = graph(4, edges)
    seq = eulerian(g)
    check_sequence(g, seq)
    assert any(s.revisited for s in seq.steps)
    assert len(seq.steps) == shortest_cover(edges, (0, 1))


def test_two_odd_nodes_walked_once_when_a_trail_fits():
    edges = [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0), (1, 4, 5.0), (0, 4, 4.0)]
    g = graph(5, edges)
    seq = eulerian(g)
    check_sequence(g, seq)
    assert seq.nodes == [1, 4, 0, 1, 2, 3]
    assert seq.repairs == 0


def test_heaviest_bridge_with_far_side_is_repaired_minimally():
    # no trail can open on the bridge (1, 2) and still reach the triangle
    edges = [(0, 1, 1.0), (1, 2, 5.0), (2, 3, 2.0), (1, 4, 3.0), (0, 4, 4.0)]
    g = graph(5, edges)
    seq = eulerian(g)
    check_sequence(g, seq)
    assert seq.repairs == 1
    assert len(seq.steps) == shortest_cover(edges, (1, 2))


def test_components_are_joined_or_broken():
    edges = [(0, 1, 1.0), (2, 3, 5.0)]
    joined = eulerian(graph(4, edges))
    assert [s.added for s in joined.steps] == [False, True, False]
    assert joined.steps[0].weight == 5.0 and joined.breaks == []
    split = eulerian(graph(4, edges), join_components=False)
    assert len(split.steps) == 2 and split.breaks == [2]
    assert [s.component for s in split.steps] == [0, 1]


def test_empty_graph_rejected():
    with pytest.raises(ValueError):
        eulerian(graph(3, []))


def test_sequence_json_lists_names_and_flags():
    seq = eulerian(graph(4, [(0, 1, 3.0), (0, 2, 2.0), (0, 3, 1.0)]))
    d = json.loads(seq.to_json())
    assert d["nodes"] == seq.node_names
    assert d["nodes"][0] in ("v0", "v1")
    assert {"from", "to", "weight", "revisited", "added", "component"} <= set(d["steps"][0])
    assert sequence_pairs(seq) == [(s.a, s.b) for s in seq.steps]


def odd_pairs(edges):
    return sum(d % 2 for d in degrees(edges).values()) // 2


def test_random_graph_suite():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    for _ in range(200):
        p, edges = random_edges(rng)
        g = graph(p, edges)
        seq = eulerian(g)
        check_sequence(g, seq)
        connected = n_components(edges) == 1
        if connected and all(d % 2 == 0 for d in degrees(edges).values()):
            assert len(seq.steps) == len(edges)
            assert not any(s.revisited for s in seq.steps)
        if connected:
            # one repair per greedy pairing plus at most one for a bridging first edge
            assert seq.repairs <= odd_pairs(edges) + 1
    assert time.perf_counter() - t0 < 5.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_walk_invariants_property(seed):
    p, edges = random_edges(np.random.default_rng(seed))
    g = graph(p, edges)
    seq = eulerian(g, join_components=False)
    check_sequence(g, seq)
    # inside a component every step is an original edge and the walk is connected
    bounds = [0] + [b - 1 - k for k, b in enumerate(seq.breaks)] + [len(seq.steps)]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        part = seq.steps[lo:hi]
        assert all(not s.added for s in part)
        assert all(s.b == t.a for s, t in zip(part[:-1], part[1:]))
        assert len({s.component for s in part}) == 1
