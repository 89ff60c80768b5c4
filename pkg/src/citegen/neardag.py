"""Back-edge machinery: orderings, ratio estimation, injection, cycle breaking.

Node rank encodes age (rank 0 = oldest).  Forward flow is newer cites
older, so an edge u -> v with rank(u) < rank(v) is a back-edge: an older
node citing a newer one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import LabeledGraph, in_csr, out_csr

log = logging.getLogger(__name__)

STRATEGIES = ("timestamps", "degree-diff", "eades")

BACK_EDGE_GAP_P = 1.0 - math.exp(-0.1)
INTRA_COMMUNITY_P = 0.8


class NearDagError(ValueError):
    pass


@dataclass(frozen=True)
class NodeOrdering:
    """Bijective age ranking of nodes; rank 0 marks the oldest node."""

    rank: np.ndarray
    strategy: str


@dataclass(frozen=True)
class CycleBreakReport:
    strategy: str
    collapsed_edges: int
    reversed_edges: int
    back_edge_ratio: float


def order_nodes(graph: LabeledGraph, strategy: str,
                timestamps: np.ndarray = None) -> NodeOrdering:
    """Heuristic age ordering of the nodes.

    degree-diff sorts by out-degree minus in-degree, descending with ties
    on ascending node id; prolific citers land at the newest ranks.  eades
    runs the greedy sink/source peeling heuristic, which leaves at most
    half the edges violating the result.  timestamps sorts ascending.
    """
    n = graph.num_nodes
    if strategy == "timestamps":
        if timestamps is None:
            timestamps = graph.timestamps
        if timestamps is None:
            raise NearDagError("timestamps strategy needs node timestamps")
        timestamps = np.asarray(timestamps)
        if timestamps.shape[0] != n:
            raise NearDagError("timestamps must cover every node")
        order = np.lexsort((np.arange(n), timestamps))
        rank = np.empty(n, np.int64)
        rank[order] = np.arange(n)
        return NodeOrdering(rank=rank, strategy=strategy)
    if strategy == "degree-diff":
        deg = graph.degrees()
        score = deg.d_out - deg.d_in
        newest_first = np.lexsort((np.arange(n), -score))
        rank = np.empty(n, np.int64)
        rank[newest_first] = np.arange(n - 1, -1, -1)
        return NodeOrdering(rank=rank, strategy=strategy)
    if strategy == "eades":
        seq = _eades_sequence(graph)
        rank = np.empty(n, np.int64)
        rank[seq] = np.arange(n - 1, -1, -1)
        return NodeOrdering(rank=rank, strategy=strategy)
    raise NearDagError(f"unknown ordering strategy {strategy!r}")


def _eades_sequence(graph: LabeledGraph) -> np.ndarray:
    """Greedy sequence with sources at the front, sinks at the back.

    Repeatedly peel current sinks to the back and sources to the front;
    when neither exists, move the node maximizing out-degree minus
    in-degree to the front.  Bucketed score lists keep it O(N + E).
    """
    n = graph.num_nodes
    out_ptr, out_idx = out_csr(graph)
    in_ptr, in_idx = in_csr(graph)
    dout = (out_ptr[1:] - out_ptr[:-1]).astype(np.int64)
    din = (in_ptr[1:] - in_ptr[:-1]).astype(np.int64)
    alive = np.ones(n, bool)
    front: list = []
    back: list = []
    sinks = [v for v in range(n) if dout[v] == 0]
    sources = [v for v in range(n) if dout[v] > 0 and din[v] == 0]
    # stale bucket entries are tolerated; pops validate score and liveness
    buckets: dict = {}

    def bucket_add(v):
        buckets.setdefault(dout[v] - din[v], []).append(v)

    for v in range(n):
        if dout[v] > 0 and din[v] > 0:
            bucket_add(v)

    def remove(v):
        alive[v] = False
        for w in out_idx[out_ptr[v]:out_ptr[v + 1]]:
            if alive[w]:
                din[w] -= 1
                if din[w] == 0 and dout[w] > 0:
                    sources.append(w)
                elif dout[w] > 0:
                    bucket_add(w)
        for w in in_idx[in_ptr[v]:in_ptr[v + 1]]:
            if alive[w]:
                dout[w] -= 1
                if dout[w] == 0:
                    sinks.append(w)
                else:
                    bucket_add(w)

    processed = 0
    while processed < n:
        moved = False
        while sinks:
            v = sinks.pop()
            if alive[v] and dout[v] == 0:
                back.append(v)
                remove(v)
                processed += 1
                moved = True
        while sources:
            v = sources.pop()
            if alive[v] and din[v] == 0 and dout[v] > 0:
                front.append(v)
                remove(v)
                processed += 1
                moved = True
        if moved or processed >= n:
            continue
        best = None
        while best is None:
            smax = max(buckets)
            lst = buckets[smax]
            while lst:
                v = lst.pop()
                if alive[v] and dout[v] > 0 and din[v] > 0 \
                        and dout[v] - din[v] == smax:
                    best = v
                    break
            if not lst:
                del buckets[smax]
        front.append(best)
        remove(best)
        processed += 1
    return np.array(front + back[::-1], np.int64)


def back_edge_ratio(graph: LabeledGraph, ordering: NodeOrdering) -> float:
    """Fraction of edges pointing from an older node to a newer one."""
    if ordering.rank.shape[0] != graph.num_nodes:
        raise NearDagError("ordering must cover every node")
    if graph.num_edges == 0:
        return 0.0
    violations = int((ordering.rank[graph.src] < ordering.rank[graph.dst]).sum())
    r = violations / graph.num_edges
    if r == 1.0:
        log.warning("every edge violates the ordering; "
                    "the orientation convention may be inverted")
    return r


def back_edge_count(n_edges: int, r: float) -> int:
    """Edges to add so the final back-edge fraction equals r."""
    if not 0.0 <= r < 1.0:
        raise NearDagError("back-edge ratio must lie in [0, 1)")
    return int(math.floor(r * n_edges / (1.0 - r)))


def inject_back_edges(dag: LabeledGraph, r: float, seed) -> LabeledGraph:
    """Add back-edges (older cites newer) until their fraction equals r.

    Newer endpoints prefer small creation-rank gaps (geometric) and
    intra-community pairs with probability 0.8 when labels exist.  Added
    edges always run from a smaller node id to a larger one, so stripping
    them recovers the input DAG.
    """
    n_back = back_edge_count(dag.num_edges, r)
    if n_back == 0:
        return dag
    n = dag.num_nodes
    rng = np.random.default_rng(seed)
    table = kernels.hs_new(dag.num_edges + n_back)
    kernels._hs_fill_edges(table, dag.src, dag.dst, n)
    if dag.labels is not None:
        first_seen = np.full(dag.labels.max() + 1, n, np.int64)
        np.minimum.at(first_seen, dag.labels, np.arange(n))
        eligible = np.flatnonzero(np.arange(n) > first_seen[dag.labels])
        has_labels = True
        labels = dag.labels
    else:
        eligible = np.empty(0, np.int64)
        has_labels = False
        labels = np.zeros(n, np.int64)
    bsrc, bdst = kernels._inject_back_edges(
        n, n_back, table, labels, has_labels, eligible,
        BACK_EDGE_GAP_P, INTRA_COMMUNITY_P, 200, rng)
    if bsrc.size < n_back:
        log.warning("injected %d of %d requested back-edges "
                    "(candidate space exhausted)", bsrc.size, n_back)
    return LabeledGraph(
        num_nodes=n,
        src=np.concatenate([dag.src, bsrc]),
        dst=np.concatenate([dag.dst, bdst]),
        labels=dag.labels, timestamps=dag.timestamps,
        names=dag.names, community_names=dag.community_names,
    )


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def cycle_break(graph: LabeledGraph, r: float, seed, strategy: str,
                timestamps: np.ndarray = None):
    """Order, reorient to a DAG, then re-reverse a fraction r of edges.

    Step 2 points every edge from the later-ranked node to the
    earlier-ranked one; a pair linked in both directions collapses to one
    edge (counted in the report).  Step 3 reverses round(r * |E|) distinct
    random edges, resampling any reversal that would duplicate an existing
    edge.  Returns (graph, report).
    """
    if not 0.0 <= r < 1.0:
        raise NearDagError("back-edge ratio must lie in [0, 1)")
    ordering = order_nodes(graph, strategy, timestamps)
    rank = ordering.rank
    n = graph.num_nodes
    lo = np.where(rank[graph.src] > rank[graph.dst], graph.dst, graph.src)
    hi = np.where(rank[graph.src] > rank[graph.dst], graph.src, graph.dst)
    keys = np.unique(hi * n + lo)
    collapsed = graph.num_edges - keys.size
    src = keys // n
    dst = keys % n
    n_edges = src.size
    n_rev = _round_half_up(r * n_edges)
    rng = np.random.default_rng(seed)
    done = 0
    if n_rev > 0:
        table = kernels.hs_new(n_edges)
        kernels._hs_fill_edges(table, src, dst, n)
        chosen = np.zeros(n_edges, bool)
        done = 0
        attempts = 0
        max_attempts = 200 * n_rev + 10_000
        while done < n_rev and attempts < max_attempts:
            attempts += 1
            e = int(rng.integers(0, n_edges))
            if chosen[e]:
                continue
            rev_key = dst[e] * n + src[e]
            if kernels._hs_contains(table, rev_key):
                continue
            if not kernels._hs_insert(table, rev_key):
                continue
            chosen[e] = True
            done += 1
        if done < n_rev:
            log.warning("reversed %d of %d requested edges "
                        "(collision space exhausted)", done, n_rev)
        src[chosen], dst[chosen] = dst[chosen].copy(), src[chosen].copy()
    out = LabeledGraph(
        num_nodes=n, src=src, dst=dst,
        labels=graph.labels, timestamps=graph.timestamps,
        names=graph.names, community_names=graph.community_names,
    )
    report = CycleBreakReport(
        strategy=strategy, collapsed_edges=int(collapsed),
        reversed_edges=done,
        back_edge_ratio=0.0 if n_edges == 0 else done / n_edges,
    )
    return out, report
