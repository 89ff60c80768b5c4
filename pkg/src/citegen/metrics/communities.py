"""Partition-quality metrics and a modularity-maximizing community detector."""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..graph import LabeledGraph
from .distances import MetricError


def _check_labels(graph: LabeledGraph, labels) -> np.ndarray:
    labels = graph.labels if labels is None else np.asarray(labels, np.int64)
    if labels is None or labels.shape[0] != graph.num_nodes:
        raise MetricError("every node needs a community label")
    return labels


def modularity(graph: LabeledGraph, labels=None) -> float:
    """Directed Newman modularity of a labelled partition.

    Q = (intra edges)/m - sum_c (outdeg_c * indeg_c) / m^2.
    """
    labels = _check_labels(graph, labels)
    m = graph.num_edges
    if m == 0:
        return 0.0
    intra = int((labels[graph.src] == labels[graph.dst]).sum())
    k = int(labels.max()) + 1
    dout_c = np.bincount(labels[graph.src], minlength=k).astype(np.float64)
    din_c = np.bincount(labels[graph.dst], minlength=k).astype(np.float64)
    return intra / m - float(np.sum(dout_c * din_c)) / (m * m)


def conductance(graph: LabeledGraph, labels=None) -> float:
    """Mean over communities of cut / min(volume inside, volume outside).

    Volumes count both edge endpoints; a community without incident edges
    contributes zero.
    """
    labels = _check_labels(graph, labels)
    k = int(labels.max()) + 1
    cut = np.zeros(k, np.float64)
    crossing = labels[graph.src] != labels[graph.dst]
    np.add.at(cut, labels[graph.src[crossing]], 1.0)
    np.add.at(cut, labels[graph.dst[crossing]], 1.0)
    deg = graph.degrees()
    vol = np.bincount(labels, weights=(deg.d_in + deg.d_out).astype(np.float64),
                      minlength=k)
    total = vol.sum()
    phi = np.zeros(k, np.float64)
    for c in range(k):
        denom = min(vol[c], total - vol[c])
        if denom > 0:
            phi[c] = cut[c] / denom
    return float(phi.mean())


def density_pair(graph: LabeledGraph, labels=None):
    """(intra, inter) edge densities of the label partition.

    Intra pools edges inside communities over the intra pair count;
    inter pools the rest.  A single community leaves no inter pairs.
    """
    labels = _check_labels(graph, labels)
    n = graph.num_nodes
    k = int(labels.max()) + 1
    sizes = np.bincount(labels, minlength=k).astype(np.float64)
    intra_pairs = float(np.sum(sizes * (sizes - 1.0)))
    inter_pairs = float(n) * (n - 1.0) - intra_pairs
    intra_edges = int((labels[graph.src] == labels[graph.dst]).sum())
    inter_edges = graph.num_edges - intra_edges
    if intra_pairs == 0:
        raise MetricError("no intra-community pairs")
    if inter_pairs == 0:
        raise MetricError("single community: inter-density undefined")
    return intra_edges / intra_pairs, inter_edges / inter_pairs


def participation(graph: LabeledGraph, labels=None,
                  direction: str = "in") -> np.ndarray:
    """Per-node participation 1 - sum_c (d_c/d)^2 over edge peers' communities.

    ``direction`` picks which edges count: "in" looks at the communities
    citing the node, "out" at the communities it cites.  Nodes without
    such edges get 0.
    """
    labels = _check_labels(graph, labels)
    n = graph.num_nodes
    k = int(labels.max()) + 1
    if direction == "in":
        nodes, peers = graph.dst, labels[graph.src]
    elif direction == "out":
        nodes, peers = graph.src, labels[graph.dst]
    else:
        raise MetricError("direction must be 'in' or 'out'")
    uk, cnt = np.unique(nodes * k + peers, return_counts=True)
    sumsq = np.bincount(uk // k, weights=cnt.astype(np.float64) ** 2,
                        minlength=n)
    d = np.bincount(nodes, minlength=n).astype(np.float64)
    out = np.zeros(n, np.float64)
    nz = d > 0
    out[nz] = 1.0 - sumsq[nz] / (d[nz] * d[nz])
    return out


def _symmetric_csr(graph: LabeledGraph):
    """Weighted symmetric adjacency W = A + A^T as sorted CSR, no diagonal."""
    n = graph.num_nodes
    a = np.concatenate([graph.src, graph.dst])
    b = np.concatenate([graph.dst, graph.src])
    uk, cnt = np.unique(a * n + b, return_counts=True)
    rows = uk // n
    indices = uk % n
    counts = np.bincount(rows, minlength=n)
    indptr = np.zeros(n + 1, np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, np.ascontiguousarray(indices), cnt.astype(np.float64)


def symmetric_modularity(graph: LabeledGraph, labels,
                         resolution: float = 1.0) -> float:
    """Generalized modularity of a partition on the symmetrized graph."""
    labels = _check_labels(graph, labels)
    if graph.num_edges == 0:
        return 0.0
    two_m = 2.0 * graph.num_edges
    same = labels[graph.src] == labels[graph.dst]
    intra = 2.0 * int(same.sum())
    deg = graph.degrees()
    kdeg = (deg.d_in + deg.d_out).astype(np.float64)
    k = int(labels.max()) + 1
    s = np.bincount(labels, weights=kdeg, minlength=k)
    return intra / two_m - resolution * float(np.sum((s / two_m) ** 2))


def detect_communities(graph: LabeledGraph, resolution: float = 1.0,
                       seed=0):
    """Label-blind greedy modularity maximization (Louvain scheme).

    Local moving on the symmetrized weighted graph followed by community
    aggregation, repeated until no move improves the objective.  The node
    visit order is drawn from ``seed``, making runs deterministic.
    Returns (labels, achieved modularity at this resolution).
    """
    n = graph.num_nodes
    if n == 0:
        raise MetricError("empty graph")
    mapping = np.arange(n, dtype=np.int64)
    if graph.num_edges == 0:
        return mapping, 0.0
    rng = np.random.default_rng(seed)
    indptr, indices, weights = _symmetric_csr(graph)
    selfw = np.zeros(n, np.float64)
    two_m = weights.sum()
    while True:
        n_cur = indptr.size - 1
        rows = np.repeat(np.arange(n_cur), np.diff(indptr))
        kdeg = np.bincount(rows, weights=weights, minlength=n_cur) + selfw
        comm = np.arange(n_cur, dtype=np.int64)
        comm_s = kdeg.copy()
        nbr_w = np.zeros(n_cur, np.float64)
        touched = np.empty(n_cur, np.int64)
        level_moves = 0
        while True:
            order = rng.permutation(n_cur).astype(np.int64)
            moves = kernels._louvain_pass(indptr, indices, weights, kdeg,
                                          comm, comm_s, order, two_m,
                                          float(resolution), nbr_w, touched)
            level_moves += moves
            if moves == 0:
                break
        if level_moves == 0:
            break
        uniq, compact = np.unique(comm, return_inverse=True)
        mapping = compact[mapping]
        if uniq.size == n_cur:
            break
        nc = uniq.size
        cu = compact[rows]
        cv = compact[indices]
        intra = cu == cv
        new_selfw = (np.bincount(cu[intra], weights=weights[intra], minlength=nc)
                     + np.bincount(compact, weights=selfw, minlength=nc))
        keys = cu[~intra] * nc + cv[~intra]
        uk, inv = np.unique(keys, return_inverse=True)
        w_new = np.bincount(inv, weights=weights[~intra])
        rows_new = uk // nc
        indices_new = np.ascontiguousarray(uk % nc)
        counts = np.bincount(rows_new, minlength=nc)
        indptr = np.zeros(nc + 1, np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices, weights, selfw = indices_new, w_new, new_selfw
    q = symmetric_modularity(graph, mapping, resolution)
    return mapping, q


def detected_sizes(labels: np.ndarray) -> np.ndarray:
    return np.bincount(labels, minlength=int(labels.max()) + 1)
