"""Path-based metrics: distances, reachability, betweenness, SCCs, longest paths."""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .. import kernels
from ..graph import LabeledGraph, out_csr
from .distances import MetricError


def pair_distances(graph: LabeledGraph, pairs: np.ndarray) -> np.ndarray:
    """Directed BFS distances for the given (source, target) pairs; -1 unreachable."""
    indptr, indices = out_csr(graph)
    return kernels._pair_distances(indptr, indices,
                                   np.ascontiguousarray(pairs[:, 0], np.int64),
                                   np.ascontiguousarray(pairs[:, 1], np.int64),
                                   graph.num_nodes)


def all_pair_distances(graph: LabeledGraph) -> np.ndarray:
    """Distances for every ordered node pair (self pairs excluded)."""
    n = graph.num_nodes
    indptr, indices = out_csr(graph)
    dist = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    out = np.empty(n * (n - 1), np.int64)
    pos = 0
    for s in range(n):
        dist.fill(-1)
        kernels._bfs_fill(indptr, indices, s, dist, queue)
        out[pos:pos + n - 1] = np.delete(dist, s)
        pos += n - 1
    return out


def finite_distances(distances: np.ndarray) -> np.ndarray:
    finite = distances[distances >= 0]
    if finite.size == 0:
        raise MetricError("no finite-distance pairs found")
    return finite


def effective_diameter(distances: np.ndarray) -> float:
    """90th percentile of the finite directed shortest-path lengths."""
    return float(np.quantile(finite_distances(distances), 0.9))


def average_path_length(distances: np.ndarray) -> float:
    return float(finite_distances(distances).mean())


def reachability_counts(graph: LabeledGraph, sources: np.ndarray) -> np.ndarray:
    """Nodes reachable from each source (the source itself not counted)."""
    indptr, indices = out_csr(graph)
    return kernels._reach_counts(indptr, indices,
                                 np.ascontiguousarray(sources, np.int64),
                                 graph.num_nodes)


def betweenness_values(graph: LabeledGraph, sources: np.ndarray = None) -> np.ndarray:
    """Per-node shortest-path betweenness, directed, normalized.

    ``sources`` restricts the Brandes accumulation to sampled source nodes;
    contributions are rescaled by n / |sources| so values estimate the
    all-source quantity, then divided by (n-1)(n-2).
    """
    n = graph.num_nodes
    if n < 3:
        raise MetricError("betweenness needs at least 3 nodes")
    if sources is None:
        sources = np.arange(n, dtype=np.int64)
    else:
        sources = np.ascontiguousarray(sources, np.int64)
    indptr, indices = out_csr(graph)
    acc = kernels._betweenness(indptr, indices, sources, n)
    scale = (n / sources.size) / ((n - 1.0) * (n - 2.0))
    return acc * scale


def scc_sizes(graph: LabeledGraph) -> np.ndarray:
    """Strongly connected component sizes, one entry per component."""
    n = graph.num_nodes
    if n == 0:
        raise MetricError("empty graph")
    mat = csr_matrix((np.ones(graph.num_edges, np.int8),
                      (graph.src, graph.dst)), shape=(n, n))
    n_comp, assign = connected_components(mat, directed=True,
                                          connection="strong")
    return np.bincount(assign, minlength=n_comp)


def longest_path_lengths(graph: LabeledGraph, rank: np.ndarray) -> np.ndarray:
    """Per-node longest path on the back-edge-stripped DAG.

    Edges violating the rank order (older endpoint citing newer) are
    ignored; what remains is acyclic by construction, so a single
    ascending-rank sweep suffices.
    """
    indptr, indices = out_csr(graph)
    return kernels._longest_path_lengths(indptr, indices,
                                         np.ascontiguousarray(rank, np.int64),
                                         graph.num_nodes)
