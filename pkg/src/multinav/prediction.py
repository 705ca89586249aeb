"""Link prediction over layer subsets via exclusive neighborhoods.

A neighbor u of v is *exclusive* to a layer subset D when every (u, v) edge
of the multiplex lies inside D. The classic Jaccard and Adamic-Adar scores
are evaluated on these exclusive neighborhoods for every candidate pair that
has no edge in any layer of D, then normalized per (algorithm, subset),
thresholded, and converted to weighted predicted links using nearby flow
values.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .multiplex import MultiplexNetwork, enumerate_layer_subsets

JACCARD = "jaccard"
ADAMIC_ADAR = "adamic_adar"
JACCARD_CLASSIC = "jaccard_classic"
AA_CLASSIC = "aa_classic"

MODIFIED_ALGORITHMS = (JACCARD, ADAMIC_ADAR)

LINK_CSV_COLUMNS = (
    "u_label",
    "v_label",
    "algorithm",
    "subset",
    "stage",
    "raw_score",
    "normalized_score",
    "weight",
)


@dataclass(frozen=True)
class ExclusiveNeighborhood:
    """Nodes adjacent to ``node`` only within the layer subset."""

    node: int
    subset: tuple[int, ...]
    members: frozenset[int]


@dataclass(frozen=True)
class ScoredPair:
    """A candidate non-edge with its similarity score (u < v canonical)."""

    u: int
    v: int
    raw_score: float
    algorithm: str
    subset: tuple[int, ...]
    normalized_score: float | None = None


@dataclass(frozen=True)
class PredictedLink:
    """A thresholded, flow-weighted predicted link.

    ``sources`` lists every (algorithm, subset, stage) occurrence that
    contributed the same node pair; it is filled by dedupe_links.
    """

    u: int
    v: int
    raw_score: float
    normalized_score: float
    weight: float
    algorithm: str
    subset: tuple[int, ...]
    stage: int
    sources: tuple[tuple[str, tuple[int, ...], int], ...] = ()


def _unoriented_adjacency(net: MultiplexNetwork, layer: int) -> np.ndarray:
    adj = net.intra[layer] > 0
    if net.directed:
        adj = adj | adj.T
    return adj


def _subset_masks(net: MultiplexNetwork, subset: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """(adjacency within any layer of the subset, adjacency in any layer outside)."""
    chosen = set(subset)
    if not chosen or not chosen <= set(range(net.n_layers)):
        raise ValueError(f"layer subset {tuple(subset)} out of range [0, {net.n_layers})")
    n = net.n_nodes
    inside = np.zeros((n, n), dtype=bool)
    outside = np.zeros((n, n), dtype=bool)
    for k in range(net.n_layers):
        mask = _unoriented_adjacency(net, k)
        if k in chosen:
            inside |= mask
        else:
            outside |= mask
    return inside, outside


def exclusive_neighbors(
    net: MultiplexNetwork,
    v: int,
    subset: Sequence[int],
) -> ExclusiveNeighborhood:
    """Neighbors of v linked to it solely within the given layer subset."""
    if not 0 <= v < net.n_nodes:
        raise ValueError(f"node {v} out of range [0, {net.n_nodes})")
    inside, outside = _subset_masks(net, subset)
    members = np.flatnonzero(inside[v] & ~outside[v])
    return ExclusiveNeighborhood(
        node=v,
        subset=tuple(subset),
        members=frozenset(int(u) for u in members if u != v),
    )


def _exclusive_sets(net: MultiplexNetwork, subset: Sequence[int]) -> tuple[list[set[int]], np.ndarray]:
    """Exclusive neighbor set per node, plus the union adjacency of the subset."""
    inside, outside = _subset_masks(net, subset)
    exclusive = inside & ~outside
    return [set(np.flatnonzero(exclusive[v]).tolist()) for v in range(net.n_nodes)], inside


def jaccard_classic(net: MultiplexNetwork, layer: int, u: int, v: int) -> float:
    """Single-layer Jaccard coefficient: |intersection| / |union| of neighborhoods."""
    if u == v:
        raise ValueError("Jaccard requires two distinct nodes")
    gu = _node_neighbors(net, layer, u)
    gv = _node_neighbors(net, layer, v)
    union = gu | gv
    if not union:
        return 0.0
    return len(gu & gv) / len(union)


def adamic_adar_classic(net: MultiplexNetwork, layer: int, u: int, v: int) -> float:
    """Single-layer Adamic-Adar: sum of 1/ln(degree) over common neighbors.

    Degree-1 common neighbors are skipped so the logarithm never vanishes
    (a node adjacent to both u and v in one layer always has degree >= 2,
    so the guard only matters for hand-built inputs).
    """
    if u == v:
        raise ValueError("Adamic-Adar requires two distinct nodes")
    gu = _node_neighbors(net, layer, u)
    gv = _node_neighbors(net, layer, v)
    score = 0.0
    for w in sorted(gu & gv):
        deg = len(_node_neighbors(net, layer, w))
        if deg > 1:
            score += 1.0 / math.log(deg)
    return score


def _node_neighbors(net: MultiplexNetwork, layer: int, v: int) -> set[int]:
    adj = net.intra[layer, v, :] > 0
    if net.directed:
        adj = adj | (net.intra[layer, :, v] > 0)
    result = set(np.flatnonzero(adj).tolist())
    result.discard(v)
    return result


def _candidate_pairs(union_adj: np.ndarray) -> Iterable[tuple[int, int]]:
    n = union_adj.shape[0]
    for u in range(n):
        for v in range(u + 1, n):
            if not union_adj[u, v]:
                yield u, v


def modified_jaccard(net: MultiplexNetwork, subset: Sequence[int]) -> list[ScoredPair]:
    """Jaccard over exclusive neighborhoods for every non-edge pair of the subset.

    Pairs whose exclusive neighborhoods are both empty are omitted; pairs with
    a non-empty union but empty intersection score 0.
    """
    subset = tuple(subset)
    exclusive, union_adj = _exclusive_sets(net, subset)
    pairs = []
    for u, v in _candidate_pairs(union_adj):
        nu = exclusive[u] - {v}
        nv = exclusive[v] - {u}
        union = nu | nv
        if not union:
            continue
        score = len(nu & nv) / len(union)
        pairs.append(ScoredPair(u, v, score, JACCARD, subset))
    return pairs


def modified_adamic_adar(net: MultiplexNetwork, subset: Sequence[int]) -> list[ScoredPair]:
    """Adamic-Adar over exclusive neighborhoods for non-edge pairs of the subset.

    Each shared exclusive neighbor contributes the inverse log of its degree in
    the union graph of the subset; pairs sharing no exclusive neighbor are
    omitted.
    """
    subset = tuple(subset)
    exclusive, union_adj = _exclusive_sets(net, subset)
    union_degree = union_adj.sum(axis=1)
    pairs = []
    for u, v in _candidate_pairs(union_adj):
        shared = (exclusive[u] - {v}) & (exclusive[v] - {u})
        if not shared:
            continue
        score = 0.0
        for w in sorted(shared):
            deg = int(union_degree[w])
            if deg > 1:
                score += 1.0 / math.log(deg)
        pairs.append(ScoredPair(u, v, score, ADAMIC_ADAR, subset))
    return pairs


def normalize_scores(pairs: Iterable[ScoredPair]) -> list[ScoredPair]:
    """Scale raw scores to [0, 1] relative to the maximum of each
    (algorithm, subset) group; all-zero groups are dropped with a warning."""
    pairs = list(pairs)
    group_max: dict[tuple[str, tuple[int, ...]], float] = {}
    for p in pairs:
        key = (p.algorithm, p.subset)
        group_max[key] = max(group_max.get(key, 0.0), p.raw_score)
    out = []
    warned = set()
    for p in pairs:
        key = (p.algorithm, p.subset)
        top = group_max[key]
        if top == 0.0:
            if key not in warned:
                warnings.warn(f"all scores are zero for {key}; group dropped", stacklevel=2)
                warned.add(key)
            continue
        out.append(replace(p, normalized_score=p.raw_score / top))
    return out


def threshold_filter(pairs: Iterable[ScoredPair], threshold: float = 0.5) -> list[ScoredPair]:
    """Keep pairs whose normalized score strictly exceeds the threshold."""
    kept = []
    for p in pairs:
        if p.normalized_score is None:
            raise ValueError("threshold_filter requires normalized scores")
        if p.normalized_score > threshold:
            kept.append(p)
    return kept


def _union_mean_weight(net: MultiplexNetwork, subset: Sequence[int]) -> float:
    values = []
    for k in subset:
        w = net.intra[k]
        if net.directed:
            values.extend(w[w > 0].tolist())
        else:
            upper = np.triu(w)
            values.extend(upper[upper > 0].tolist())
    if not values:
        raise ValueError(f"no edges in layers {tuple(subset)}; cannot derive a fallback weight")
    return float(np.mean(values))


def assign_weights(
    pairs: Iterable[ScoredPair],
    net: MultiplexNetwork,
    subset: Sequence[int],
) -> list[PredictedLink]:
    """Turn thresholded pairs into weighted links.

    The weight is the normalized score times the mean flow on edges joining
    either endpoint to their shared exclusive neighbors, over the subset's
    layers. Pairs without such flow context fall back to the subset's mean
    edge weight.
    """
    subset = tuple(subset)
    exclusive, _ = _exclusive_sets(net, subset)
    fallback: float | None = None
    links = []
    for p in pairs:
        if p.normalized_score is None:
            raise ValueError("assign_weights requires normalized scores")
        shared = (exclusive[p.u] - {p.v}) & (exclusive[p.v] - {p.u})
        flows = []
        for w in sorted(shared):
            for k in subset:
                for a in (p.u, p.v):
                    if net.intra[k, a, w] > 0:
                        flows.append(float(net.intra[k, a, w]))
                    if net.directed and net.intra[k, w, a] > 0:
                        flows.append(float(net.intra[k, w, a]))
        if flows:
            mean_flow = float(np.mean(flows))
        else:
            if fallback is None:
                fallback = _union_mean_weight(net, subset)
            mean_flow = fallback
        links.append(
            PredictedLink(
                u=p.u,
                v=p.v,
                raw_score=p.raw_score,
                normalized_score=p.normalized_score,
                weight=p.normalized_score * mean_flow,
                algorithm=p.algorithm,
                subset=subset,
                stage=len(subset),
            )
        )
    return links


def dedupe_links(links: Iterable[PredictedLink]) -> list[PredictedLink]:
    """Collapse to one link per unordered node pair.

    The maximum-weight instance wins; weight ties go to the lexicographically
    smallest (algorithm, subset). The winner records every contributing
    (algorithm, subset, stage) tag. Ordered by node pair for determinism.
    """
    groups: dict[tuple[int, int], list[PredictedLink]] = {}
    for link in links:
        key = (min(link.u, link.v), max(link.u, link.v))
        groups.setdefault(key, []).append(link)
    out = []
    for key in sorted(groups):
        candidates = groups[key]
        winner = min(candidates, key=lambda l: (-l.weight, l.algorithm, l.subset))
        tags = sorted({(l.algorithm, l.subset, l.stage) for l in candidates})
        out.append(replace(winner, sources=tuple(tags)))
    return out


def run_stage(
    net: MultiplexNetwork,
    k: int,
    algorithm: str,
    threshold: float = 0.5,
) -> list[PredictedLink]:
    """Score, normalize, threshold and weight every layer subset of size k,
    then deduplicate the stage's links across subsets."""
    if algorithm not in MODIFIED_ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {MODIFIED_ALGORITHMS}")
    scorer = modified_jaccard if algorithm == JACCARD else modified_adamic_adar
    links: list[PredictedLink] = []
    for subset in enumerate_layer_subsets(net.n_layers, k):
        pairs = scorer(net, subset)
        kept = threshold_filter(normalize_scores(pairs), threshold)
        links.extend(assign_weights(kept, net, subset))
    return dedupe_links(links)


def format_subset(subset: Sequence[int]) -> str:
    return "+".join(str(k) for k in subset)


def parse_subset(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split("+"))


def write_links_csv(path: str | Path, links: Iterable[PredictedLink], labels: Sequence[str]) -> None:
    """Export predicted links with labeled endpoints."""
    with open(path, "w", encoding="utf-8", newline="") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(LINK_CSV_COLUMNS)
        for l in links:
            writer.writerow(
                [
                    labels[l.u],
                    labels[l.v],
                    l.algorithm,
                    format_subset(l.subset),
                    l.stage,
                    repr(float(l.raw_score)),
                    repr(float(l.normalized_score)),
                    repr(float(l.weight)),
                ]
            )


def read_links_csv(path: str | Path, label_index: dict[str, int]) -> list[PredictedLink]:
    """Read a predicted-links CSV, mapping labels back to node indices."""
    links = []
    with open(path, encoding="utf-8", newline="") as stream:
        reader = csv.DictReader(stream)
        missing = set(LINK_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"links file missing columns {sorted(missing)}")
        for row in reader:
            try:
                u = label_index[row["u_label"]]
                v = label_index[row["v_label"]]
            except KeyError as exc:
                raise ValueError(f"unknown node label {exc.args[0]!r} in links file") from None
            links.append(
                PredictedLink(
                    u=u,
                    v=v,
                    raw_score=float(row["raw_score"]),
                    normalized_score=float(row["normalized_score"]),
                    weight=float(row["weight"]),
                    algorithm=row["algorithm"],
                    subset=parse_subset(row["subset"]),
                    stage=int(row["stage"]),
                )
            )
    return links
