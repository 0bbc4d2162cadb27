"""Minimum-weight perfect matching decoding on a :class:`DecoderGraph`.

Two routes are provided.  The reference route reduces a defect set to a
complete defect graph (Dijkstra shortest paths, one boundary copy per
defect) and solves it exactly with a blossom matcher; it also rebuilds the
correction edge by edge.  The fast route hands the whole decoder graph to
PyMatching and only predicts logical flips.  Tests check that both routes
agree on the matched weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .codes import PauliSupport
from .decoder_graph import DecoderGraph


@dataclass
class DefectGraph:
    """Complete graph on the defects and their boundary copies.

    Node ``i < m`` is defect ``defects[i]``; node ``m + i`` is its boundary
    copy.  ``weights`` is (2m, 2m) with ``inf`` for forbidden pairs.
    """

    defects: list
    weights: np.ndarray
    predecessors: np.ndarray = field(repr=False)
    boundary: int = -1

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]


def _adjacency(graph: DecoderGraph):
    adj = getattr(graph, "_adjacency", None)
    if adj is None:
        us = np.array([e.u for e in graph.edges], dtype=np.int64)
        vs = np.array([e.v for e in graph.edges], dtype=np.int64)
        ws = np.array([e.weight for e in graph.edges])
        n = graph.n_vertices
        adj = csr_matrix((np.concatenate([ws, ws]), (np.concatenate([us, vs]), np.concatenate([vs, us]))),
                         shape=(n, n))
        graph._adjacency = adj
    return adj


def _edge_lookup(graph: DecoderGraph) -> dict:
    lk = getattr(graph, "_lookup", None)
    if lk is None:
        lk = {}
        for e in graph.edges:
            lk[(e.u, e.v)] = e
            lk[(e.v, e.u)] = e
        graph._lookup = lk
    return lk


def shortest_paths(graph: DecoderGraph, defects) -> DefectGraph:
    defects = [int(v) for v in defects]
    if not defects:
        raise ValueError("need at least one defect")
    if any(v < 0 or v >= graph.boundary for v in defects):
        raise ValueError("defects must be detector vertices of the graph")
    adj = _adjacency(graph)
    dist, pred = dijkstra(adj, directed=False, indices=defects, return_predecessors=True)
    m = len(defects)
    w = np.full((2 * m, 2 * m), np.inf)
    for i in range(m):
        for j in range(m):
            if i != j:
                w[i, j] = dist[i, defects[j]]
        w[i, m + i] = w[m + i, i] = dist[i, graph.boundary]
    w[m:, m:] = 0.0
    np.fill_diagonal(w, np.inf)
    reach = np.isfinite(w[:m]).any(axis=1)
    if not reach.all():
        raise RuntimeError(f"defect {defects[int(np.argmin(reach))]} cannot reach any partner")
    return DefectGraph(defects, w, pred, graph.boundary)


def mwpm(dg: DefectGraph) -> list:
    """Exact minimum-weight perfect matching; pairs of node indices, sorted."""
    n = dg.n_nodes
    if n % 2:
        raise ValueError("perfect matching needs an even number of nodes")
    if n == 0:
        return []
    finite = dg.weights[np.isfinite(dg.weights)]
    big = float(finite.max()) * n + 1.0 if finite.size else 1.0
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if np.isfinite(dg.weights[i, j]):
                g.add_edge(i, j, weight=big - float(dg.weights[i, j]))
    pairs = nx.max_weight_matching(g, maxcardinality=True)
    out = sorted(tuple(sorted(p)) for p in pairs)
    if len(out) * 2 != n:
        raise RuntimeError("no perfect matching exists")
    return out


def matching_weight(dg: DefectGraph, pairs) -> float:
    return float(sum(dg.weights[i, j] for i, j in pairs))


def brute_force_mwpm(weights: np.ndarray) -> float:
    """Minimum perfect-matching weight by dynamic programming over subsets."""
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if n % 2:
        raise ValueError("odd node count")
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def best(mask: int) -> float:
        if mask == full:
            return 0.0
        i = next(k for k in range(n) if not mask >> k & 1)
        out = np.inf
        for j in range(i + 1, n):
            if not mask >> j & 1 and np.isfinite(w[i, j]):
                out = min(out, w[i, j] + best(mask | 1 << i | 1 << j))
        return out

    return best(0)


def _path(dg: DefectGraph, src_index: int, target: int) -> list:
    """Vertices from defect ``src_index`` to vertex ``target`` along the shortest path."""
    pred = dg.predecessors[src_index]
    path = [target]
    while path[-1] != dg.defects[src_index]:
        p = pred[path[-1]]
        if p < 0:
            raise RuntimeError("broken predecessor chain")
        path.append(int(p))
    return path[::-1]


def matching_to_correction(pairs, dg: DefectGraph, graph: DecoderGraph):
    """XOR of edge corrections (and observable bits) along every matched path."""
    lk = _edge_lookup(graph)
    m = len(dg.defects)
    corr = PauliSupport()
    obs = np.zeros(graph.n_observables, dtype=np.uint8)
    for i, j in pairs:
        if i >= m and j >= m:
            continue
        if j >= m:
            path = _path(dg, i, dg.boundary)
        else:
            path = _path(dg, i, dg.defects[j])
        for a, b in zip(path, path[1:]):
            e = lk[(a, b)]
            corr = corr * e.correction
            obs ^= np.asarray(e.observables, dtype=np.uint8)
    return corr, obs


def decode_exact(graph: DecoderGraph, defects):
    """Reference decode of one defect set: (correction, predicted logical flips, weight)."""
    if len(defects) == 0:
        return PauliSupport(), np.zeros(graph.n_observables, dtype=np.uint8), 0.0
    dg = shortest_paths(graph, defects)
    pairs = mwpm(dg)
    corr, obs = matching_to_correction(pairs, dg, graph)
    return corr, obs, matching_weight(dg, pairs)


class Decoder:
    """Batch decoder predicting logical flips for dense detection events."""

    def __init__(self, graph: DecoderGraph, backend: str = "pymatching"):
        if backend not in ("pymatching", "exact"):
            raise ValueError("backend must be 'pymatching' or 'exact'")
        self.graph = graph
        self.backend = backend
        self._pm = graph.to_pymatching() if backend == "pymatching" else None

    def decode_batch(self, dets: np.ndarray) -> np.ndarray:
        dets = np.asarray(dets, dtype=np.uint8)
        k = self.graph.n_observables
        out = np.zeros((dets.shape[0], k), dtype=np.uint8)
        live = np.flatnonzero(dets.any(axis=1))
        if live.size == 0:
            return out
        if self._pm is not None:
            width = self._pm.num_detectors
            sub = dets[live]
            if sub.shape[1] < width:
                sub = np.pad(sub, ((0, 0), (0, width - sub.shape[1])))
            pred = self._pm.decode_batch(sub[:, :max(width, 1)])
            out[live, :pred.shape[1]] = pred[:, :k]
            return out
        for s in live:
            out[s] = decode_exact(self.graph, np.flatnonzero(dets[s]))[1]
        return out

    def matched_weight(self, defects) -> float:
        """Total weight of the matching chosen for one defect set."""
        if self._pm is None:
            return decode_exact(self.graph, defects)[2]
        syn = np.zeros(max(self._pm.num_detectors, self.graph.boundary), dtype=np.uint8)
        syn[list(defects)] = 1
        _, w = self._pm.decode(syn[:self._pm.num_detectors], return_weight=True)
        return float(w)
