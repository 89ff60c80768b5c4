import logging

import numpy as np
import pytest

from citegen.graph import LabeledGraph, is_acyclic
from citegen.neardag import (
    NearDagError,
    back_edge_count,
    back_edge_ratio,
    cycle_break,
    inject_back_edges,
    order_nodes,
)


def edge_set(graph):
    return set(zip(graph.src.tolist(), graph.dst.tolist()))


# ---------------------------------------------------------------- orderings


def test_order_degree_diff_chain(make_graph):
    # Scores out-in are 1, 0, -1, so node 0 is newest and node 2 oldest.
    graph = make_graph(3, [(0, 1), (1, 2)])
    ordering = order_nodes(graph, "degree-diff")
    assert ordering.rank.tolist() == [2, 1, 0]
    assert back_edge_ratio(graph, ordering) == 0.0


def test_order_degree_diff_tie_breaks_on_id(make_graph):
    # Both nodes score zero; the lower id is treated as newer, so exactly
    # one of the two edges violates the ordering.
    graph = make_graph(2, [(0, 1), (1, 0)])
    ordering = order_nodes(graph, "degree-diff")
    assert ordering.rank.tolist() == [1, 0]
    assert back_edge_ratio(graph, ordering) == 0.5


def test_order_timestamps_explicit(make_graph):
    graph = make_graph(3, [(0, 1)])
    ordering = order_nodes(graph, "timestamps", np.array([5, 1, 3]))
    assert ordering.rank.tolist() == [2, 0, 1]


def test_order_timestamps_tie_breaks_on_id(make_graph):
    graph = make_graph(3, [(0, 1)])
    ordering = order_nodes(graph, "timestamps", np.array([1, 1, 0]))
    assert ordering.rank.tolist() == [1, 2, 0]


def test_order_timestamps_from_graph_attribute(make_graph):
    graph = make_graph(2, [(0, 1)], timestamps=[4, 2])
    ordering = order_nodes(graph, "timestamps")
    assert ordering.rank.tolist() == [1, 0]
    assert back_edge_ratio(graph, ordering) == 0.0


def test_order_timestamps_missing_rejected(make_graph):
    graph = make_graph(2, [(1, 0)])
    with pytest.raises(NearDagError, match="timestamps"):
        order_nodes(graph, "timestamps")


def test_order_timestamps_wrong_length_rejected(make_graph):
    graph = make_graph(3, [(1, 0)])
    with pytest.raises(NearDagError, match="every node"):
        order_nodes(graph, "timestamps", np.array([1, 2]))


def test_order_unknown_strategy_rejected(make_graph):
    graph = make_graph(2, [(1, 0)])
    with pytest.raises(NearDagError, match="strategy"):
        order_nodes(graph, "oldest-first")


def test_eades_on_dag_has_no_violations(dag_graph):
    ordering = order_nodes(dag_graph, "eades")
    assert back_edge_ratio(dag_graph, ordering) == 0.0


def test_eades_violates_at_most_half_the_edges(make_graph):
    # The greedy peeling heuristic guarantees the ordering keeps at least
    # half of the edges forward; check by enumeration on random digraphs.
    rng = np.random.default_rng(0)
    n = 10
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for _ in range(50):
        mask = rng.random(len(pairs)) < 0.3
        edges = [p for p, keep in zip(pairs, mask) if keep]
        if not edges:
            edges = [(0, 1)]
        graph = make_graph(n, edges)
        ordering = order_nodes(graph, "eades")
        rank = ordering.rank
        violations = int((rank[graph.src] < rank[graph.dst]).sum())
        assert 2 * violations <= graph.num_edges


# ---------------------------------------------------------------- ratios


def test_back_edge_ratio_requires_full_cover(make_graph, dag_graph):
    other = make_graph(2, [(1, 0)])
    ordering = order_nodes(other, "degree-diff")
    with pytest.raises(NearDagError, match="every node"):
        back_edge_ratio(dag_graph, ordering)


def test_back_edge_ratio_empty_graph(make_graph):
    graph = make_graph(3, [])
    ordering = order_nodes(graph, "degree-diff")
    assert back_edge_ratio(graph, ordering) == 0.0


def test_back_edge_ratio_warns_when_every_edge_violates(make_graph, caplog):
    graph = make_graph(2, [(0, 1)], timestamps=[0, 1])
    ordering = order_nodes(graph, "timestamps")
    with caplog.at_level(logging.WARNING):
        ratio = back_edge_ratio(graph, ordering)
    assert ratio == 1.0
    assert "orientation" in caplog.text


def test_back_edge_count_fixtures():
    assert back_edge_count(1000, 0.0) == 0
    assert back_edge_count(1000, 0.05) == 52
    assert back_edge_count(900, 0.1) == 100
    assert back_edge_count(800, 0.2) == 200


def test_back_edge_count_rejects_bad_ratio():
    with pytest.raises(NearDagError):
        back_edge_count(100, 1.0)
    with pytest.raises(NearDagError):
        back_edge_count(100, -0.1)


# ---------------------------------------------------------------- injection


def test_inject_zero_ratio_is_identity(dag_graph):
    assert inject_back_edges(dag_graph, 0.0, 1) is dag_graph


@pytest.mark.parametrize("r", [0.05, 0.1, 0.2])
def test_inject_exact_count_and_ratio(dag_graph, r):
    n_back = back_edge_count(dag_graph.num_edges, r)
    out = inject_back_edges(dag_graph, r, 11)
    assert out.num_edges == dag_graph.num_edges + n_back
    injected = int((out.src < out.dst).sum())
    assert injected == n_back
    ordering = order_nodes(out, "timestamps", np.arange(out.num_nodes))
    assert back_edge_ratio(out, ordering) == n_back / out.num_edges


def test_inject_strip_restores_input_dag(dag_graph, near_dag_graph):
    # Generated edges run new -> old (src > dst) while injected ones run
    # old -> new, so the id comparison separates them exactly.
    keep = near_dag_graph.src > near_dag_graph.dst
    stripped = LabeledGraph(
        num_nodes=near_dag_graph.num_nodes,
        src=near_dag_graph.src[keep], dst=near_dag_graph.dst[keep],
        labels=near_dag_graph.labels)
    assert edge_set(stripped) == edge_set(dag_graph)
    assert is_acyclic(stripped)


def test_inject_deterministic(dag_graph):
    a = inject_back_edges(dag_graph, 0.1, 7)
    b = inject_back_edges(dag_graph, 0.1, 7)
    c = inject_back_edges(dag_graph, 0.1, 8)
    assert np.array_equal(a.src, b.src) and np.array_equal(a.dst, b.dst)
    assert not (np.array_equal(a.src, c.src) and np.array_equal(a.dst, c.dst))


def test_inject_no_duplicate_edges(near_dag_graph):
    keys = near_dag_graph.src * near_dag_graph.num_nodes + near_dag_graph.dst
    assert np.unique(keys).size == keys.size


def test_inject_prefers_intra_community(near_dag_graph):
    mask = near_dag_graph.src < near_dag_graph.dst
    src = near_dag_graph.src[mask]
    dst = near_dag_graph.dst[mask]
    intra = (near_dag_graph.labels[src] == near_dag_graph.labels[dst]).mean()
    assert intra > 0.7


def test_inject_prefers_small_creation_gaps(near_dag_graph):
    # Gaps follow a geometric law with mean near ten; a uniform endpoint
    # choice over 1500 nodes would average around five hundred.
    mask = near_dag_graph.src < near_dag_graph.dst
    gaps = near_dag_graph.dst[mask] - near_dag_graph.src[mask]
    assert gaps.mean() < 50
    assert np.median(gaps) < 25


def test_inject_warns_when_candidates_run_out(make_graph, caplog):
    # Two nodes admit a single old -> new edge but the ratio asks for three.
    graph = make_graph(2, [(1, 0)])
    with caplog.at_level(logging.WARNING):
        out = inject_back_edges(graph, 0.75, 3)
    assert out.num_edges == 2
    assert "1 of 3" in caplog.text


# ---------------------------------------------------------------- breaking


def test_cycle_break_triangle(make_graph):
    graph = make_graph(3, [(0, 1), (1, 2), (2, 0)])
    out, report = cycle_break(graph, 0.0, 1, "degree-diff")
    assert edge_set(out) == {(0, 1), (1, 2), (0, 2)}
    assert is_acyclic(out)
    assert report.collapsed_edges == 0
    assert report.reversed_edges == 0
    assert report.back_edge_ratio == 0.0


def test_cycle_break_collapses_mutual_pairs(make_graph):
    graph = make_graph(2, [(0, 1), (1, 0)])
    out, report = cycle_break(graph, 0.0, 1, "degree-diff")
    assert edge_set(out) == {(0, 1)}
    assert report.collapsed_edges == 1


@pytest.mark.parametrize("r,expected", [(0.04, 0), (0.05, 1), (0.25, 3)])
def test_cycle_break_rounds_reversals_half_up(make_graph, r, expected):
    edges = [(i, i + 1) for i in range(10)]
    graph = make_graph(11, edges, timestamps=list(range(11)))
    out, report = cycle_break(graph, r, 2, "timestamps")
    assert report.reversed_edges == expected
    assert report.back_edge_ratio == pytest.approx(expected / 10)
    assert out.num_edges == 10


def test_cycle_break_consistent_dag_is_noop_and_idempotent(dag_graph):
    ts = np.arange(dag_graph.num_nodes)
    once, rep1 = cycle_break(dag_graph, 0.0, 5, "timestamps", ts)
    assert rep1.collapsed_edges == 0 and rep1.reversed_edges == 0
    assert edge_set(once) == edge_set(dag_graph)
    twice, rep2 = cycle_break(once, 0.0, 5, "timestamps", ts)
    assert rep2.collapsed_edges == 0 and rep2.reversed_edges == 0
    assert edge_set(twice) == edge_set(once)


def test_cycle_break_reverses_exact_random_subset(dag_graph):
    ts = np.arange(dag_graph.num_nodes)
    base, _ = cycle_break(dag_graph, 0.0, 3, "timestamps", ts)
    out, report = cycle_break(dag_graph, 0.1, 3, "timestamps", ts)
    n_rev = int(np.floor(0.1 * base.num_edges + 0.5))
    assert report.reversed_edges == n_rev
    base_edges = edge_set(base)
    out_edges = edge_set(out)
    assert len(base_edges & out_edges) == base.num_edges - n_rev
    flipped = out_edges - base_edges
    assert len(flipped) == n_rev
    assert all((v, u) in base_edges for u, v in flipped)


def test_cycle_break_deterministic(dag_graph):
    a, _ = cycle_break(dag_graph, 0.2, 9, "degree-diff")
    b, _ = cycle_break(dag_graph, 0.2, 9, "degree-diff")
    assert np.array_equal(a.src, b.src) and np.array_equal(a.dst, b.dst)


def test_cycle_break_rejects_bad_ratio(make_graph):
    graph = make_graph(2, [(1, 0)])
    with pytest.raises(NearDagError):
        cycle_break(graph, 1.0, 1, "degree-diff")
