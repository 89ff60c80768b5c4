import numpy as np
import pytest

from citegen.metrics.communities import (
    conductance,
    density_pair,
    detect_communities,
    detected_sizes,
    modularity,
    participation,
    symmetric_modularity,
)
from citegen.metrics.distances import MetricError


def dense_modularity_oracle(graph, labels):
    """Directed modularity from the dense definition, one pair at a time."""
    n = graph.num_nodes
    m = graph.num_edges
    a = np.zeros((n, n))
    a[graph.src, graph.dst] = 1.0
    dout = a.sum(axis=1)
    din = a.sum(axis=0)
    q = 0.0
    for i in range(n):
        for j in range(n):
            if labels[i] == labels[j]:
                q += a[i, j] - dout[i] * din[j] / m
    return q / m


def clique_pair_edges(cross=False):
    edges = [(i, j) for i in range(5) for j in range(5) if i != j]
    edges += [(i + 5, j + 5) for i in range(5) for j in range(5) if i != j]
    if cross:
        edges.append((0, 5))
    return edges


def test_modularity_two_cliques(make_graph):
    graph = make_graph(10, clique_pair_edges(), labels=[0] * 5 + [1] * 5)
    assert modularity(graph) == pytest.approx(0.5)


def test_modularity_single_community_is_zero(make_graph):
    graph = make_graph(3, [(0, 1), (1, 2)], labels=[0, 0, 0])
    # intra/m is one and the null term is one as well.
    assert modularity(graph) == pytest.approx(0.0)


def test_modularity_matches_dense_oracle(make_graph):
    rng = np.random.default_rng(19)
    pairs = [(i, j) for i in range(12) for j in range(12) if i != j]
    for _ in range(15):
        mask = rng.random(len(pairs)) < 0.2
        edges = [p for p, keep in zip(pairs, mask) if keep] or [(0, 1)]
        labels = rng.integers(0, 3, 12)
        graph = make_graph(12, edges, labels=labels)
        assert modularity(graph) == pytest.approx(
            dense_modularity_oracle(graph, labels), abs=1e-12)


def test_modularity_empty_graph(make_graph):
    assert modularity(make_graph(3, [], labels=[0, 1, 0])) == 0.0


def test_conductance_fixture(make_graph):
    # One crossing edge; each side has volume 3, so both communities get
    # conductance 1/3.
    graph = make_graph(4, [(0, 1), (2, 3), (1, 2)], labels=[0, 0, 1, 1])
    assert conductance(graph) == pytest.approx(1.0 / 3.0)


def test_conductance_isolated_community_contributes_zero(make_graph):
    graph = make_graph(5, [(0, 1), (2, 3), (1, 2)], labels=[0, 0, 1, 1, 2])
    assert conductance(graph) == pytest.approx((1.0 / 3.0 + 1.0 / 3.0) / 3.0)


def test_density_pair_fixture(make_graph):
    graph = make_graph(4, [(0, 1), (2, 3), (1, 2)], labels=[0, 0, 1, 1])
    intra, inter = density_pair(graph)
    assert intra == pytest.approx(2.0 / 4.0)
    assert inter == pytest.approx(1.0 / 8.0)


def test_density_pair_degenerate_partitions(make_graph):
    single = make_graph(3, [(0, 1)], labels=[0, 0, 0])
    with pytest.raises(MetricError, match="single community"):
        density_pair(single)
    singletons = make_graph(3, [(0, 1)], labels=[0, 1, 2])
    with pytest.raises(MetricError, match="intra"):
        density_pair(singletons)


def test_participation_fixtures(make_graph):
    graph = make_graph(3, [(0, 2), (1, 2)], labels=[0, 1, 1])
    part_in = participation(graph, direction="in")
    # Node 2 is cited once from each of two communities.
    assert part_in.tolist() == [0.0, 0.0, 0.5]
    part_out = participation(graph, direction="out")
    assert part_out.tolist() == [0.0, 0.0, 0.0]


def test_participation_rejects_bad_direction(make_graph):
    graph = make_graph(2, [(0, 1)], labels=[0, 0])
    with pytest.raises(MetricError, match="direction"):
        participation(graph, direction="sideways")


def test_metrics_require_labels(make_graph):
    graph = make_graph(2, [(0, 1)])
    for fn in (modularity, conductance, density_pair, participation):
        with pytest.raises(MetricError, match="label"):
            fn(graph)


def test_symmetric_modularity_two_cliques(make_graph):
    graph = make_graph(10, clique_pair_edges(), labels=[0] * 5 + [1] * 5)
    labels = graph.labels
    assert symmetric_modularity(graph, labels) == pytest.approx(0.5)
    # Doubling the resolution doubles the null term.
    assert symmetric_modularity(graph, labels, 2.0) == pytest.approx(0.0)


def test_detect_communities_two_cliques(make_graph):
    graph = make_graph(10, clique_pair_edges())
    labels, q = detect_communities(graph, 1.0, 0)
    assert int(labels.max()) + 1 == 2
    assert sorted(np.bincount(labels).tolist()) == [5, 5]
    assert q == pytest.approx(0.5)
    assert set(labels[:5].tolist()) != set(labels[5:].tolist())


def test_detect_communities_survives_weak_cross_edge(make_graph):
    graph = make_graph(10, clique_pair_edges(cross=True))
    labels, q = detect_communities(graph, 1.0, 0)
    assert int(labels.max()) + 1 == 2
    assert q == pytest.approx(80.0 / 82.0 - 0.5)


def test_detect_communities_reports_achieved_modularity(make_graph):
    graph = make_graph(10, clique_pair_edges(cross=True))
    labels, q = detect_communities(graph, 0.5, 3)
    assert q == pytest.approx(symmetric_modularity(graph, labels, 0.5))


def test_detect_communities_deterministic(dag_graph):
    la, qa = detect_communities(dag_graph, 1.0, 5)
    lb, qb = detect_communities(dag_graph, 1.0, 5)
    assert np.array_equal(la, lb)
    assert qa == qb


def test_detect_communities_beats_planted_partition(dag_graph):
    labels, q = detect_communities(dag_graph, 1.0, 0)
    planted = symmetric_modularity(dag_graph, dag_graph.labels)
    assert q >= planted - 0.02
    assert 2 <= int(labels.max()) + 1 <= 100


def test_detect_communities_degenerate_inputs(make_graph):
    edgeless = make_graph(4, [])
    labels, q = detect_communities(edgeless, 1.0, 0)
    assert labels.tolist() == [0, 1, 2, 3]
    assert q == 0.0
    with pytest.raises(MetricError, match="empty"):
        detect_communities(make_graph(0, []), 1.0, 0)


def test_detected_sizes():
    assert detected_sizes(np.array([0, 0, 1, 2, 2])).tolist() == [2, 1, 2]
