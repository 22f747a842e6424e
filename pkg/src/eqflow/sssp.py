"""Deterministic Dijkstra and all-or-nothing assignment.

Weights may be floats or :class:`fractions.Fraction`; the arithmetic is
whatever the weights provide, so the same code serves the exact certificate
checks.

Tie-breaking is part of the contract.  Among tentative nodes at equal
distance the smallest node index is settled first.  A node's parent is the
smallest arc_id among the tight arcs leaving already-settled nodes.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np


class NegativeWeight(ValueError):
    pass


class Unreachable(ValueError):
    pass


@dataclass
class DistanceMap:
    source: int
    dist: list
    parent: list  # arc_id, or -1 for the source and unreachable nodes


def _check_weights(weights):
    for a, w in enumerate(weights):
        if not w >= 0 or w == math.inf:
            raise NegativeWeight(f"arc {a} has weight {w!r}; need finite and >= 0")


def shortest_paths(inst, weights, source: int, *, check: bool = True) -> DistanceMap:
    if isinstance(weights, np.ndarray):
        weights = weights.tolist()
    if len(weights) != inst.n_arcs:
        raise ValueError(f"{len(weights)} weights for {inst.n_arcs} arcs")
    if check:
        _check_weights(weights)
    n = inst.n_nodes
    dist = [math.inf] * n
    parent = [-1] * n
    done = [False] * n
    dist[source] = weights[0] * 0 if weights else 0
    heap = [(dist[source], source)]
    out = inst.out_arcs
    while heap:
        d, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for a, w in out[v]:
            if done[w]:
                continue
            nd = d + weights[a]
            if nd < dist[w]:
                dist[w] = nd
                parent[w] = a
                heapq.heappush(heap, (nd, w))
            elif nd == dist[w] and a < parent[w]:
                parent[w] = a
    return DistanceMap(source, dist, parent)


def extract_path(inst, dmap: DistanceMap, sink: int) -> list[int]:
    """Arc ids from the source to ``sink`` along parent pointers."""
    if dmap.dist[sink] == math.inf:
        raise Unreachable(f"node {sink} unreachable from {dmap.source}")
    path = []
    v = sink
    while v != dmap.source:
        a = dmap.parent[v]
        path.append(a)
        v = inst.arcs[a].tail
    path.reverse()
    return path


def all_or_nothing(inst, weights) -> tuple[np.ndarray, np.ndarray]:
    """Route every commodity's full demand on its shortest path.

    Returns ``(flow, lengths)``: the pseudo-flow of shape
    ``(n_commodities, n_arcs)`` and the per-commodity path lengths.  One
    Dijkstra run serves all commodities sharing a source.
    """
    if isinstance(weights, np.ndarray):
        weights = weights.tolist()
    _check_weights(weights)
    flow = np.zeros((inst.n_commodities, inst.n_arcs))
    lengths = np.zeros(inst.n_commodities)
    cache: dict[int, DistanceMap] = {}
    for k, com in enumerate(inst.commodities):
        dmap = cache.get(com.source)
        if dmap is None:
            dmap = cache[com.source] = shortest_paths(inst, weights, com.source, check=False)
        path = extract_path(inst, dmap, com.sink)
        flow[k, path] = inst.demand[k]
        lengths[k] = dmap.dist[com.sink]
    return flow, lengths
