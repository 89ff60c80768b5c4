import numpy as np
import pytest

from citegen.estimation import (EstimationError, community_stats, estimate,
                                gini, roundtrip_report)
from citegen.generator import CsParams, generate


def pairwise_gini(values):
    values = np.asarray(values, np.float64)
    n = values.size
    diffs = np.abs(values[:, None] - values[None, :]).sum()
    return diffs / (2.0 * n * n * values.mean())


def test_gini_fixture():
    assert gini([0, 0, 0, 1]) == pytest.approx(0.75)
    assert gini([1, 1, 1, 1]) == pytest.approx(0.0)
    assert gini([0, 0, 0, 0]) == 0.0


def test_gini_matches_pairwise_oracle():
    rng = np.random.default_rng(0)
    for _ in range(25):
        values = rng.integers(0, 40, size=rng.integers(2, 60))
        if values.sum() == 0:
            continue
        assert abs(gini(values) - pairwise_gini(values)) <= 1e-12


def test_gini_scale_invariance():
    rng = np.random.default_rng(1)
    values = rng.integers(0, 30, size=50).astype(float)
    values[0] = 3.0
    assert gini(values * 17.5) == pytest.approx(gini(values), abs=1e-12)


def test_gini_rejects_bad_input():
    with pytest.raises(EstimationError):
        gini([])
    with pytest.raises(EstimationError):
        gini([1.0, -2.0])


def test_community_stats_hand_graph(make_graph):
    # community 0 = {0, 2}, community 1 = {1, 3}; edges 2->0, 3->0, 3->1
    graph = make_graph(4, [(2, 0), (3, 0), (3, 1)], labels=[0, 1, 0, 1])
    stats = community_stats(graph)
    assert stats.sizes.tolist() == [2, 2]
    assert stats.out_totals.tolist() == [1, 2]
    assert stats.in_totals.tolist() == [2, 1]
    assert stats.gini_in[0] == pytest.approx(gini([2, 0]))
    assert stats.gini_in[1] == pytest.approx(gini([1, 0]))


def test_estimate_ratio_formulas(make_graph):
    # m-hat multiplies out-degree totals by 1/(N_i - 1), matching a growth
    # process in which community seeds emit no edges.
    edges = [(2, 0), (2, 1), (3, 0), (3, 2), (4, 0), (4, 3)]
    graph = make_graph(5, edges, labels=[0, 0, 0, 0, 0])
    fit = estimate(graph)
    assert fit.params.p[0] == pytest.approx(1.0)
    assert fit.params.m[0] == pytest.approx(6.0 / 4.0)


def test_estimate_rho_fixture_point_one(make_graph):
    # Community 0 realizes Gini 0.75 (in-degrees 0,0,0,1), in-total 1, and
    # out-total 4 over 4 members; the inversion gives exactly 0.1.
    edges = [(1, 4), (2, 4), (3, 4), (3, 5), (5, 3)]
    graph = make_graph(6, edges, labels=[0, 0, 0, 0, 1, 1])
    stats = community_stats(graph)
    assert stats.gini_in[0] == pytest.approx(0.75)
    assert stats.in_totals[0] == 1
    assert stats.out_totals[0] == 4
    fit = estimate(graph)
    assert fit.rho_raw[0] == pytest.approx(0.1)
    assert fit.params.rho[0] == pytest.approx(0.1)
    assert not fit.clamped_low[0] and not fit.clamped_high[0]


def test_estimate_clamps_and_flags(make_graph):
    # In-degrees [2, 2, 0, 0] give Gini 0.5 with in-total and out-total both
    # 4, so the raw inversion is 4 / -2 = -2, hitting the lower clamp.
    edges = [(2, 0), (2, 1), (3, 0), (3, 1)]
    graph = make_graph(4, edges, labels=[0] * 4)
    fit = estimate(graph)
    assert fit.rho_raw[0] == pytest.approx(-2.0)
    assert fit.clamped_low[0]
    assert fit.params.rho[0] == pytest.approx(1e-3)
    assert fit.any_clamped


def test_estimate_clamps_high_on_uniform_cycle(make_graph):
    # A 4-cycle has uniform in-degrees, Gini 0, so the raw inversion is
    # 16 / 4 = 4, above one, hitting the upper clamp.
    edges = [(0, 1), (1, 2), (2, 3), (3, 0)]
    graph = make_graph(4, edges, labels=[0] * 4)
    fit = estimate(graph)
    assert fit.rho_raw[0] == pytest.approx(4.0)
    assert fit.clamped_high[0]
    assert fit.params.rho[0] == pytest.approx(1.0 - 1e-3)
    assert fit.any_clamped


def test_estimate_rejects_singleton_community(make_graph):
    graph = make_graph(3, [(2, 0)], labels=[0, 1, 0])
    with pytest.raises(EstimationError, match="1"):
        estimate(graph)


def test_estimate_requires_labels(make_graph):
    with pytest.raises(EstimationError):
        estimate(make_graph(3, [(2, 0)]))


def test_estimate_recovers_p_m_sigma2():
    params = CsParams(p=(0.55, 0.45), m=(6.0, 3.5), rho=(0.3, 0.6),
                      sigma2=(12.0, 3.5))
    graph = generate(params, 20000, 3)
    fit = estimate(graph)
    n = graph.num_nodes
    for c in range(2):
        se = np.sqrt(params.p[c] * (1 - params.p[c]) / n)
        assert abs(fit.params.p[c] - params.p[c]) <= 3 * se
        assert fit.params.m[c] == pytest.approx(params.m[c], rel=0.03)
        assert fit.params.sigma2[c] == pytest.approx(params.sigma2[c],
                                                     rel=0.15)


def test_estimate_rho_bias_is_upward_and_shrinks_with_m():
    # The Gini of the generated (integer) in-degrees sits below the
    # continuous-law value the inversion assumes, inflating rho-hat; the
    # gap closes as the mean degree grows.
    bias = {}
    for m in (5.0, 40.0):
        params = CsParams(p=(1.0,), m=(m,), rho=(0.5,), sigma2=(m,))
        graph = generate(params, 30000, 7)
        fit = estimate(graph)
        bias[m] = fit.params.rho[0] - 0.5
    assert 0 < bias[40.0] < bias[5.0]
    assert bias[5.0] < 0.25
    assert bias[40.0] < 0.05


def test_roundtrip_report_shape(three_community_params):
    report = roundtrip_report(three_community_params, 3000, 17)
    assert report.p_abs_err.shape == (3,)
    assert (report.p_abs_err < 0.05).all()
    assert (report.m_rel_err < 0.15).all()
