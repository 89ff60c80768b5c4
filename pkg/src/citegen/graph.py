"""Directed-graph container, file ingestion, degrees, and subsampling."""

from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from . import kernels

log = logging.getLogger(__name__)

PathOrStream = Union[str, os.PathLike, "io.TextIOBase", IO[str]]


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledGraph:
    """Immutable directed graph; node ids are dense and equal creation rank.

    ``labels`` holds dense 0-based community ids (external files may use any
    token; ``community_names`` keeps the originals).  ``timestamps`` is an
    optional per-node integer epoch.  Self-loops and duplicate edges are
    invalid here; loaders drop them before construction.
    """

    num_nodes: int
    src: np.ndarray
    dst: np.ndarray
    labels: Optional[np.ndarray] = None
    timestamps: Optional[np.ndarray] = None
    names: Optional[tuple] = None
    community_names: Optional[tuple] = None

    def __post_init__(self):
        src = np.ascontiguousarray(self.src, dtype=np.int64)
        dst = np.ascontiguousarray(self.dst, dtype=np.int64)
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        if src.shape != dst.shape:
            raise GraphError("src/dst length mismatch")
        if src.size:
            lo = min(src.min(), dst.min())
            hi = max(src.max(), dst.max())
            if lo < 0 or hi >= self.num_nodes:
                raise GraphError("edge endpoint outside [0, num_nodes)")
            if (src == dst).any():
                raise GraphError("self-loop in edge list")
            keys = src * self.num_nodes + dst
            if np.unique(keys).size != keys.size:
                raise GraphError("duplicate edge in edge list")
        if self.labels is not None:
            lab = np.ascontiguousarray(self.labels, dtype=np.int64)
            if lab.shape[0] != self.num_nodes:
                raise GraphError("labels length mismatch")
            object.__setattr__(self, "labels", lab)
        if self.timestamps is not None:
            ts = np.ascontiguousarray(self.timestamps, dtype=np.int64)
            if ts.shape[0] != self.num_nodes:
                raise GraphError("timestamps length mismatch")
            object.__setattr__(self, "timestamps", ts)
        for a in (self.src, self.dst, self.labels, self.timestamps):
            if a is not None:
                a.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return int(self.src.size)

    @property
    def num_communities(self) -> int:
        if self.labels is None or self.num_nodes == 0:
            return 0
        return int(self.labels.max()) + 1

    def degrees(self) -> "DegreeView":
        return DegreeView(
            d_in=np.bincount(self.dst, minlength=self.num_nodes),
            d_out=np.bincount(self.src, minlength=self.num_nodes),
        )

    def edge_key_set(self) -> np.ndarray:
        """Hash table of edge keys (src*n+dst) for O(1) membership tests."""
        table = kernels.hs_new(max(self.num_edges, 1))
        kernels._hs_fill_edges(table, self.src, self.dst, self.num_nodes)
        return table

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.src == u)[self.dst == v].any()) if self.num_edges else False


@dataclass(frozen=True)
class DegreeView:
    d_in: np.ndarray
    d_out: np.ndarray


@dataclass
class LoadReport:
    lines: int = 0
    duplicate_edges: int = 0
    self_loops: int = 0


def _open(stream: PathOrStream):
    if isinstance(stream, (str, os.PathLike)):
        return open(stream, "r", encoding="utf-8"), True
    return stream, False


def load_edge_list(stream: PathOrStream, has_header: bool = False):
    """Parse ``src<TAB>dst`` lines into a graph.

    Node identifiers are interned to dense 0-based ids in first-appearance
    order.  Returns ``(graph, report)`` where the report carries the dropped
    self-loop and duplicate counts.
    """
    fh, close = _open(stream)
    report = LoadReport()
    ids: dict = {}
    src_list: list = []
    dst_list: list = []
    seen: set = set()
    try:
        for lineno, raw in enumerate(fh, start=1):
            if has_header and lineno == 1:
                continue
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise GraphError(f"malformed edge line {lineno}: {raw!r}")
            report.lines += 1
            a = ids.setdefault(parts[0], len(ids))
            b = ids.setdefault(parts[1], len(ids))
            if a == b:
                report.self_loops += 1
                continue
            if (a, b) in seen:
                report.duplicate_edges += 1
                continue
            seen.add((a, b))
            src_list.append(a)
            dst_list.append(b)
    finally:
        if close:
            fh.close()
    if report.self_loops or report.duplicate_edges:
        log.warning(
            "dropped %d self-loops and %d duplicate edges on load",
            report.self_loops, report.duplicate_edges,
        )
    graph = LabeledGraph(
        num_nodes=len(ids),
        src=np.array(src_list, np.int64),
        dst=np.array(dst_list, np.int64),
        names=tuple(ids),
    )
    return graph, report


def _load_node_column(stream: PathOrStream, graph: LabeledGraph, what: str,
                      has_header: bool = False):
    if graph.names is None:
        name_to_id = {str(i): i for i in range(graph.num_nodes)}
    else:
        name_to_id = {name: i for i, name in enumerate(graph.names)}
    fh, close = _open(stream)
    out: dict = {}
    try:
        for lineno, raw in enumerate(fh, start=1):
            if has_header and lineno == 1:
                continue
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise GraphError(f"malformed {what} line {lineno}: {raw!r}")
            if parts[0] not in name_to_id:
                raise GraphError(
                    f"{what} line {lineno} references unknown node {parts[0]!r}")
            out[name_to_id[parts[0]]] = parts[1]
    finally:
        if close:
            fh.close()
    return out


def load_labels(stream: PathOrStream, graph: LabeledGraph,
                has_header: bool = False):
    """Read ``node<TAB>community`` lines keyed against ``graph``'s node names.

    Returns ``(node_id -> dense community id, community_names)`` covering a
    subset of nodes; apply :func:`prune_unlabeled` to attach them.
    """
    raw = _load_node_column(stream, graph, "label", has_header)
    communities: dict = {}
    mapping = {}
    for node, token in raw.items():
        mapping[node] = communities.setdefault(token, len(communities))
    return mapping, tuple(communities)


def load_timestamps(stream: PathOrStream, graph: LabeledGraph,
                    has_header: bool = False):
    raw = _load_node_column(stream, graph, "timestamp", has_header)
    out = {}
    for node, token in raw.items():
        try:
            out[node] = int(token)
        except ValueError:
            raise GraphError(f"non-integer timestamp for node {node}: {token!r}")
    return out


def prune_unlabeled(graph: LabeledGraph, label_map: dict,
                    community_names: Optional[tuple] = None) -> LabeledGraph:
    """Drop nodes without labels (and their edges); attach remaining labels."""
    keep = np.zeros(graph.num_nodes, bool)
    for node in label_map:
        keep[node] = True
    if keep.all():
        labels = np.array([label_map[i] for i in range(graph.num_nodes)], np.int64)
        return LabeledGraph(
            num_nodes=graph.num_nodes, src=graph.src, dst=graph.dst,
            labels=labels, timestamps=graph.timestamps, names=graph.names,
            community_names=community_names,
        )
    return induced_subgraph(graph, np.flatnonzero(keep),
                            label_map=label_map,
                            community_names=community_names)


def induced_subgraph(graph: LabeledGraph, nodes: np.ndarray,
                     label_map: Optional[dict] = None,
                     community_names: Optional[tuple] = None) -> LabeledGraph:
    """Induced subgraph on ``nodes`` (sorted ascending to keep creation order)."""
    nodes = np.unique(np.asarray(nodes, np.int64))
    remap = np.full(graph.num_nodes, -1, np.int64)
    remap[nodes] = np.arange(nodes.size)
    mask = (remap[graph.src] >= 0) & (remap[graph.dst] >= 0)
    if label_map is not None:
        labels = np.array([label_map[int(v)] for v in nodes], np.int64)
    elif graph.labels is not None:
        labels = graph.labels[nodes]
    else:
        labels = None
    return LabeledGraph(
        num_nodes=int(nodes.size),
        src=remap[graph.src[mask]],
        dst=remap[graph.dst[mask]],
        labels=labels,
        timestamps=None if graph.timestamps is None else graph.timestamps[nodes],
        names=None if graph.names is None else tuple(graph.names[int(v)] for v in nodes),
        community_names=community_names if community_names is not None
        else graph.community_names,
    )


def to_csr(num_nodes: int, src: np.ndarray, dst: np.ndarray):
    """CSR adjacency (indptr, indices) with per-row sorted indices."""
    order = np.lexsort((dst, src))
    s = src[order]
    d = dst[order]
    counts = np.bincount(s, minlength=num_nodes)
    indptr = np.zeros(num_nodes + 1, np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, np.ascontiguousarray(d, np.int64)


def out_csr(graph: LabeledGraph):
    return to_csr(graph.num_nodes, graph.src, graph.dst)


def in_csr(graph: LabeledGraph):
    return to_csr(graph.num_nodes, graph.dst, graph.src)


def undirected_csr(graph: LabeledGraph):
    """Symmetrized simple adjacency (duplicates collapsed)."""
    n = graph.num_nodes
    a = np.concatenate([graph.src, graph.dst])
    b = np.concatenate([graph.dst, graph.src])
    keys = np.unique(a * n + b)
    return to_csr(n, keys // n, keys % n)


def bfs_subsample(graph: LabeledGraph, max_nodes: int, seed) -> LabeledGraph:
    """Induced subgraph on the first ``max_nodes`` nodes reached by BFS.

    Traversal treats edges as undirected and starts from a uniformly random
    node, restarting from a random unvisited node whenever a component is
    exhausted.  Kept nodes are renumbered in ascending original id, so the
    creation-order convention survives subsampling.
    """
    if max_nodes < 1:
        raise GraphError("max_nodes must be >= 1")
    if graph.num_nodes <= max_nodes:
        return graph
    indptr, indices = undirected_csr(graph)
    rng = np.random.default_rng(seed)
    starts = rng.permutation(graph.num_nodes)
    visited = np.zeros(graph.num_nodes, np.bool_)
    queue = np.empty(graph.num_nodes, np.int64)
    collected: list = []
    remaining = max_nodes
    for s in starts:
        if remaining <= 0:
            break
        if visited[s]:
            continue
        got = kernels._bfs_collect(indptr, indices, int(s), visited, queue, remaining)
        collected.append(queue[:got].copy())
        remaining -= got
    return induced_subgraph(graph, np.concatenate(collected))


def sample_pairs(graph: LabeledGraph, n_pairs: int, seed) -> np.ndarray:
    """Uniform ordered pairs with distinct endpoints, with replacement."""
    if graph.num_nodes < 2:
        raise GraphError("need at least 2 nodes to sample pairs")
    rng = np.random.default_rng(seed)
    out = np.empty((n_pairs, 2), np.int64)
    if n_pairs == 0:
        return out
    out[:, 0] = rng.integers(0, graph.num_nodes, n_pairs)
    out[:, 1] = rng.integers(0, graph.num_nodes, n_pairs)
    clash = out[:, 0] == out[:, 1]
    while clash.any():
        out[clash, 1] = rng.integers(0, graph.num_nodes, int(clash.sum()))
        clash = out[:, 0] == out[:, 1]
    return out


def save_edge_list(graph: LabeledGraph, stream: PathOrStream, header: Optional[str] = None):
    fh, close = _open_write(stream)
    try:
        if header:
            fh.write(header.rstrip("\n") + "\n")
        names = graph.names
        for s, d in zip(graph.src, graph.dst):
            if names is None:
                fh.write(f"{s}\t{d}\n")
            else:
                fh.write(f"{names[s]}\t{names[d]}\n")
    finally:
        if close:
            fh.close()


def save_labels(graph: LabeledGraph, stream: PathOrStream):
    """Write ``node<TAB>community`` lines for every node with an edge.

    Isolated nodes are omitted (with a warning) because the paired
    edge-list file cannot carry them; keeping them here would make the
    file pair internally inconsistent on reload.
    """
    if graph.labels is None:
        raise GraphError("graph carries no labels")
    deg = graph.degrees()
    connected = (deg.d_in + deg.d_out) > 0
    skipped = int(graph.num_nodes - connected.sum())
    if skipped:
        log.warning("omitting %d isolated nodes from the labels file", skipped)
    fh, close = _open_write(stream)
    try:
        names = graph.names
        cnames = graph.community_names
        for v in range(graph.num_nodes):
            if not connected[v]:
                continue
            node = str(v) if names is None else names[v]
            lab = graph.labels[v]
            token = str(lab) if cnames is None else cnames[lab]
            fh.write(f"{node}\t{token}\n")
    finally:
        if close:
            fh.close()


def _open_write(stream: PathOrStream):
    if isinstance(stream, (str, os.PathLike)):
        return open(stream, "w", encoding="utf-8"), True
    return stream, False


def is_acyclic(graph: LabeledGraph) -> bool:
    indptr, indices = out_csr(graph)
    return bool(kernels._topo_check(indptr, indices, graph.num_nodes))
