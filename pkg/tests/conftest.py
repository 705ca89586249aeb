"""Shared helpers: random network generators, connectivity checks, and a
plain-dict scoring oracle used to cross-check the array implementations."""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csgraph, csr_matrix

from multinav import FlowEdge, build_multiplex, build_supra_transition
from multinav.prediction import JACCARD


def random_multiplex(rng, n_nodes, n_layers, directed=False, p=0.45, coupling=1.0):
    """Erdos-Renyi-style layers with uniform random flows in [0.5, 2)."""
    edges = []
    for k in range(n_layers):
        for i in range(n_nodes):
            for j in range(n_nodes):
                if i == j or (not directed and j < i):
                    continue
                if rng.random() < p:
                    edges.append(FlowEdge(i, j, k, float(rng.uniform(0.5, 2.0))))
    return build_multiplex(
        edges, n_layers=n_layers, directed=directed, coupling=coupling, n_nodes=n_nodes
    )


def random_single_layer(rng, n_nodes, directed=False, p=0.4):
    return random_multiplex(rng, n_nodes, 1, directed=directed, p=p, coupling=0.0)


def is_strongly_connected(net, strategy="rwc"):
    """True when every supra-state reaches every other through positive entries."""
    matrix = build_supra_transition(net, strategy).matrix
    if matrix.shape[0] == 0:
        return False
    n_comp, _ = csgraph.connected_components(
        csr_matrix(matrix > 0), directed=True, connection="strong"
    )
    return int(n_comp) == 1


def connected_random_multiplex(rng, max_nodes=12, max_layers=3, directed=None, p=0.45):
    """Rejection-sample a strongly connected random multiplex."""
    while True:
        n = int(rng.integers(6, max_nodes + 1))
        l = int(rng.integers(1, max_layers + 1))
        want_directed = bool(rng.integers(0, 2)) if directed is None else directed
        net = random_multiplex(rng, n, l, directed=want_directed, p=p)
        if is_strongly_connected(net):
            return net


def triangle_network(coupling=0.0):
    edges = [FlowEdge(0, 1, 0, 1.0), FlowEdge(1, 2, 0, 1.0), FlowEdge(0, 2, 0, 1.0)]
    return build_multiplex(edges, coupling=coupling)


def complete_graph(n):
    edges = [FlowEdge(i, j, 0, 1.0) for i in range(n) for j in range(i + 1, n)]
    return build_multiplex(edges, coupling=0.0)


def cycle_graph(n):
    edges = [FlowEdge(i, (i + 1) % n, 0, 1.0) for i in range(n)]
    return build_multiplex(edges, coupling=0.0)


def directed_trap_network():
    """0 <-> 1 feeding the absorbing pair 2 <-> 3; walkers never return."""
    edges = [
        FlowEdge(0, 1, 0, 1.0),
        FlowEdge(1, 0, 0, 1.0),
        FlowEdge(1, 2, 0, 1.0),
        FlowEdge(2, 3, 0, 1.0),
        FlowEdge(3, 2, 0, 1.0),
    ]
    return build_multiplex(edges, directed=True, coupling=0.0)


# --- an independent scoring oracle built from plain dicts of edge layers -----

def oracle_pair_layers(net):
    """Map each unordered node pair to the set of layers holding that edge."""
    layers = {}
    for k in range(net.n_layers):
        adj = net.intra[k] > 0
        if net.directed:
            adj = adj | adj.T
        for u in range(net.n_nodes):
            for v in range(u + 1, net.n_nodes):
                if adj[u, v]:
                    layers.setdefault((u, v), set()).add(k)
    return layers


def oracle_exclusive(pair_layers, n, v, subset):
    chosen = set(subset)
    result = set()
    for u in range(n):
        if u == v:
            continue
        layers = pair_layers.get((min(u, v), max(u, v)), set())
        if layers & chosen and layers <= chosen:
            result.add(u)
    return result


def oracle_union_adjacent(pair_layers, n, v, subset):
    chosen = set(subset)
    return {
        u
        for u in range(n)
        if u != v and pair_layers.get((min(u, v), max(u, v)), set()) & chosen
    }


def oracle_scores(net, subset, algorithm):
    pair_layers = oracle_pair_layers(net)
    n = net.n_nodes
    expected = {}
    for u in range(n):
        for v in range(u + 1, n):
            if pair_layers.get((u, v), set()) & set(subset):
                continue  # existing edge of the subset's union graph
            nu = oracle_exclusive(pair_layers, n, u, subset)
            nv = oracle_exclusive(pair_layers, n, v, subset)
            nu.discard(v)
            nv.discard(u)
            if algorithm == JACCARD:
                union = nu | nv
                if union:
                    expected[(u, v)] = len(nu & nv) / len(union)
            else:
                shared = nu & nv
                if shared:
                    score = 0.0
                    for w in sorted(shared):
                        deg = len(oracle_union_adjacent(pair_layers, n, w, subset))
                        if deg > 1:
                            score += 1.0 / math.log(deg)
                    expected[(u, v)] = score
    return expected
